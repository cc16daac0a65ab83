"""HTTP + WebSocket gateway: the dashboard's window onto a running node.

The gateway is a pure façade. Every mutation it accepts is issued through
the target composite's control service (probes through the composite's
probe API, which itself is type registration plus instantiation), so
replaying the gateway's calls as control calls yields the same assembly.
State flows back out over /events as discovery, assembly, interface and
dispatch-trace messages.

Payload schemas live in docs/gateway.md.
"""

from __future__ import annotations

import queue
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from starlette.concurrency import run_in_threadpool

from .composite import Composite, ControlClient
from .console import RuntimeNode
from .errors import RemoteFault, ServiceUnavailable, SlcaError
from .values import kind_of

NOT_FOUND_ERRORS = {
    "UnknownTypeId", "UnknownInstanceId", "UnknownBindingId",
    "UnknownEndpoint", "UnknownProperty", "UnknownServiceUid",
    "ServiceUnavailable", "UnknownSubscription", "MethodNotFound",
    "UnknownComposite",
}


class InstanceBody(BaseModel):
    type_id: str
    instance_id: str
    properties: Dict[str, Any] = Field(default_factory=dict)


class BindingBody(BaseModel):
    source: str
    targets: List[str]
    binding_id: Optional[str] = None


class ProbeBody(BaseModel):
    kind: str
    name: str
    signature: List[str] = Field(default_factory=list)


class TypeBody(BaseModel):
    type_id: str


class AdaptationBody(BaseModel):
    action: str  # begin | commit


class EventBroadcaster:
    """Fans runtime events out to every connected websocket."""

    def __init__(self):
        self._queues: List[queue.Queue] = []
        self._lock = threading.Lock()

    def attach(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._queues.append(q)
        return q

    def detach(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._queues:
                self._queues.remove(q)

    def push(self, event: dict) -> None:
        with self._lock:
            targets = list(self._queues)
        for q in targets:
            q.put(event)


def _error_response(name: str, detail: str) -> JSONResponse:
    status = 404 if name in NOT_FOUND_ERRORS else 422
    return JSONResponse(status_code=status,
                        content={"error": name, "detail": detail})


def create_gateway_app(runtime: RuntimeNode,
                       static_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="slcalite gateway")
    events = EventBroadcaster()
    app.state.runtime = runtime
    app.state.events = events

    runtime.node.watch(
        "*",
        lambda s: events.push({"event": "discovery", "change": "found",
                               "uid": s.service_uid,
                               "kinds": sorted(s.service_kinds),
                               "endpoint": s.endpoint}),
        lambda uid: events.push({"event": "discovery", "change": "lost",
                                 "uid": uid}),
    )

    def wire_composite(composite: Composite) -> None:
        composite.container.add_listener(
            lambda change, detail: events.push({
                "event": "assembly", "composite": composite.name,
                "change": change, "detail": detail}))
        composite.add_interface_listener(
            lambda manifest: events.push({
                "event": "interface", "composite": composite.name,
                "functional": [d.service_uid
                               for d in manifest.functional_services]}))
        composite.container.add_trace_listener(
            lambda trace: events.push({
                "event": "dispatch", "composite": composite.name,
                "trace": trace.trace_id, "root": str(trace.root),
                "events": len(trace.events)}))

    for composite in runtime.composites.values():
        wire_composite(composite)
    runtime.on_composite_created.append(wire_composite)

    def composite_or_none(name: str) -> Optional[Composite]:
        return runtime.composites.get(name)

    def control_for(name: str) -> ControlClient:
        composite = runtime.composites[name]
        return ControlClient(runtime.node, composite.control_uid)

    @app.exception_handler(SlcaError)
    async def handle_slca_error(request, exc: SlcaError):
        if isinstance(exc, RemoteFault):
            return _error_response(exc.name, exc.detail)
        return _error_response(type(exc).__name__, str(exc))

    # -- discovery ------------------------------------------------------------

    @app.get("/services")
    def list_services():
        sightings = runtime.node.known_sightings("*")
        return sorted(
            ({"uid": s.service_uid, "kinds": sorted(s.service_kinds),
              "endpoint": s.endpoint} for s in sightings),
            key=lambda d: d["uid"])

    @app.get("/services/{uid}")
    def get_service(uid: str):
        try:
            return runtime.node.describe(uid).to_doc()
        except ServiceUnavailable as exc:
            return _error_response("ServiceUnavailable", str(exc))

    # -- composites -------------------------------------------------------------

    @app.get("/composites")
    def list_composites():
        out = []
        for name, composite in sorted(runtime.composites.items()):
            manifest = composite.manifest()
            out.append({
                "name": name,
                "uid": composite.uid,
                "control_uid": composite.control_uid,
                "publication_mode": manifest.publication_mode,
                "functional": [d.service_uid
                               for d in manifest.functional_services],
            })
        return out

    @app.get("/composites/{name}/assembly")
    def get_assembly(name: str):
        if composite_or_none(name) is None:
            return _error_response("UnknownComposite", name)
        return control_for(name).get_assembly()

    @app.post("/composites/{name}/instances")
    def add_instance(name: str, body: InstanceBody):
        if composite_or_none(name) is None:
            return _error_response("UnknownComposite", name)
        control_for(name).add_instance(body.type_id, body.instance_id,
                                       body.properties)
        return {"ok": True, "instance_id": body.instance_id}

    @app.delete("/composites/{name}/instances/{instance_id}")
    def remove_instance(name: str, instance_id: str):
        if composite_or_none(name) is None:
            return _error_response("UnknownComposite", name)
        control_for(name).remove_instance(instance_id)
        return {"ok": True}

    @app.post("/composites/{name}/bindings")
    def add_binding(name: str, body: BindingBody):
        if composite_or_none(name) is None:
            return _error_response("UnknownComposite", name)
        binding_id = control_for(name).add_binding(body.source, body.targets,
                                                   body.binding_id)
        return {"ok": True, "binding_id": binding_id}

    @app.delete("/composites/{name}/bindings/{binding_id}")
    def remove_binding(name: str, binding_id: str):
        if composite_or_none(name) is None:
            return _error_response("UnknownComposite", name)
        control_for(name).remove_binding(binding_id)
        return {"ok": True}

    @app.post("/composites/{name}/probes")
    def add_probe(name: str, body: ProbeBody):
        composite = composite_or_none(name)
        if composite is None:
            return _error_response("UnknownComposite", name)
        signature = tuple(kind_of(k) for k in body.signature)
        probe = composite.add_probe(body.kind, body.name, signature)
        return {"ok": True, "probe_instance_id": probe.probe_instance_id}

    @app.delete("/composites/{name}/probes/{probe_instance_id}")
    def remove_probe(name: str, probe_instance_id: str):
        composite = composite_or_none(name)
        if composite is None:
            return _error_response("UnknownComposite", name)
        composite.remove_probe(probe_instance_id)
        return {"ok": True}

    @app.post("/composites/{name}/types")
    def add_type(name: str, body: TypeBody):
        if composite_or_none(name) is None:
            return _error_response("UnknownComposite", name)
        control_for(name).add_type(body.type_id)
        return {"ok": True}

    @app.delete("/composites/{name}/types/{type_id}")
    def remove_type(name: str, type_id: str):
        if composite_or_none(name) is None:
            return _error_response("UnknownComposite", name)
        control_for(name).remove_type(type_id)
        return {"ok": True}

    @app.post("/composites/{name}/adaptation")
    def adaptation(name: str, body: AdaptationBody):
        if composite_or_none(name) is None:
            return _error_response("UnknownComposite", name)
        control = control_for(name)
        if body.action == "begin":
            control.begin_adaptation()
        elif body.action == "commit":
            control.commit_adaptation()
        else:
            return _error_response("BadAction", body.action)
        return {"ok": True, "action": body.action}

    @app.get("/types")
    def library_types():
        return {"type_ids": runtime.library.type_ids()}

    # -- event stream ----------------------------------------------------------

    @app.websocket("/events")
    async def event_stream(socket: WebSocket):
        import asyncio

        await socket.accept()
        q = events.attach()

        async def pump():
            while True:
                try:
                    event = await run_in_threadpool(q.get, True, 0.2)
                except queue.Empty:
                    continue
                await socket.send_json(event)

        pump_task = asyncio.ensure_future(pump())
        try:
            while True:
                # inbound traffic is ignored; this raises on disconnect
                await socket.receive_text()
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()
            try:
                await pump_task
            except (asyncio.CancelledError, WebSocketDisconnect, RuntimeError):
                pass
            events.detach(q)

    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="dashboard")

    return app
