// Dashboard entry point: wires store, socket, actions and the DOM shell.

import { UserActions } from "./actions.js";
import { GatewayClient } from "./client.js";
import { renderSvg } from "./render.js";
import { EventSocket } from "./socket.js";
import { DashboardStore } from "./store.js";
import { EndpointDoc } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toasts");
  const item = document.createElement("div");
  item.className = "toast";
  item.textContent = message;
  box.appendChild(item);
  setTimeout(() => item.remove(), 4500);
}

async function boot(): Promise<void> {
  const base = window.location.origin;
  const client = new GatewayClient(base);

  const composites = await client.getComposites();
  const params = new URLSearchParams(window.location.search);
  const compositeName = params.get("composite") ?? composites[0]?.name;
  const picker = el<HTMLSelectElement>("composite-picker");
  for (const composite of composites) {
    const option = document.createElement("option");
    option.value = composite.name;
    option.textContent = composite.name;
    option.selected = composite.name === compositeName;
    picker.appendChild(option);
  }
  picker.onchange = () => {
    const next = new URL(window.location.href);
    next.searchParams.set("composite", picker.value);
    window.location.href = next.toString();
  };
  if (!compositeName) {
    el<HTMLDivElement>("banner").textContent =
      "no composites on this node yet; create one from the console";
    return;
  }

  const store = new DashboardStore(compositeName, client);
  const actions = new UserActions(client, store, toast);

  const canvas = el<HTMLDivElement>("canvas");
  const banner = el<HTMLDivElement>("banner");
  const feed = el<HTMLUListElement>("service-feed");
  const adaptButton = el<HTMLButtonElement>("adaptation-toggle");

  let dragSource: EndpointDoc | null = null;

  function redraw(): void {
    const view = store.view();
    canvas.innerHTML = renderSvg(view);
    banner.textContent = view.error ?? "";
    banner.style.display = view.error ? "block" : "none";
    adaptButton.textContent = view.publicationMode === "immediate"
      ? "begin adaptation" : "commit adaptation";
    el<HTMLSpanElement>("functional-count").textContent =
      `${view.functional.length} exported`;
  }

  store.subscribe(redraw);
  setInterval(() => store.flushActivity(), 120);

  async function refreshServices(): Promise<void> {
    const services = await client.getServices();
    feed.innerHTML = "";
    for (const service of services) {
      const item = document.createElement("li");
      item.textContent = `${service.uid}  [${service.kinds.join(", ")}]`;
      feed.appendChild(item);
    }
  }

  const socket = new EventSocket(
    base.replace(/^http/, "ws") + "/events",
    (event) => {
      store.handleEvent(event);
      if (event.event === "discovery") void refreshServices();
    },
    () => { void store.resync(); void refreshServices(); },
    (url) => new WebSocket(url) as unknown as import("./socket.js").SocketLike,
  );
  socket.connect();

  // -- pointer wiring: select, drag-to-bind ---------------------------------

  canvas.addEventListener("pointerdown", (event) => {
    const target = event.target as Element;
    const port = target.closest("[data-port]");
    if (port) {
      if (port.getAttribute("data-direction") === "output") {
        dragSource = {
          instance_id: port.getAttribute("data-node")!,
          port_id: port.getAttribute("data-port")!,
        };
        canvas.classList.add("dragging");
      }
      return;
    }
    const node = target.closest("[data-node]");
    if (node) {
      store.select({ kind: "node", id: node.getAttribute("data-node")! });
      return;
    }
    const edge = target.closest("[data-edge]");
    if (edge) {
      store.select({ kind: "edge", id: edge.getAttribute("data-edge")! });
      return;
    }
    store.select(null);
  });

  canvas.addEventListener("pointerup", async (event) => {
    canvas.classList.remove("dragging");
    if (!dragSource) return;
    const source = dragSource;
    dragSource = null;
    const target = (event.target as Element).closest("[data-port]");
    if (!target || target.getAttribute("data-direction") !== "input") return;
    const outcome = await actions.dragBind(source, {
      instance_id: target.getAttribute("data-node")!,
      port_id: target.getAttribute("data-port")!,
    });
    if (outcome.refusedByPrecheck) toast(`refused: ${outcome.refusedByPrecheck}`);
  });

  // -- toolbar ----------------------------------------------------------------

  el<HTMLButtonElement>("remove-selection").onclick = () => {
    void actions.removeSelection();
  };
  adaptButton.onclick = () => { void actions.toggleAdaptation(); };

  const instanceDialog = el<HTMLDialogElement>("instance-dialog");
  el<HTMLButtonElement>("add-instance").onclick = async () => {
    const typePicker = el<HTMLSelectElement>("instance-type");
    typePicker.innerHTML = "";
    for (const typeId of await client.getTypeIds()) {
      const option = document.createElement("option");
      option.value = typeId;
      option.textContent = typeId;
      typePicker.appendChild(option);
    }
    instanceDialog.showModal();
  };
  el<HTMLFormElement>("instance-form").onsubmit = (event) => {
    event.preventDefault();
    const typeId = el<HTMLSelectElement>("instance-type").value;
    const instanceId = el<HTMLInputElement>("instance-id").value;
    void actions.loadType(typeId).then(() =>
      actions.addInstance(typeId, instanceId, {}));
    instanceDialog.close();
  };

  const probeDialog = el<HTMLDialogElement>("probe-dialog");
  el<HTMLButtonElement>("add-probe").onclick = () => probeDialog.showModal();
  el<HTMLFormElement>("probe-form").onsubmit = (event) => {
    event.preventDefault();
    const kind = el<HTMLSelectElement>("probe-kind").value as "sink" | "source";
    const name = el<HTMLInputElement>("probe-name").value;
    const raw = el<HTMLInputElement>("probe-signature").value.trim();
    const signature = raw ? raw.split(",").map((s) => s.trim()) : [];
    void actions.addProbe(kind, name, signature);
    probeDialog.close();
  };

  await store.resync();
  await refreshServices();
}

boot().catch((err) => {
  document.body.innerHTML =
    `<pre class="fatal">dashboard failed to start: ${String(err)}</pre>`;
});
