"""Composite services: a container exported to the bus through two faces.

The functional interface is dynamic: every live probe component in the
container is advertised as its own service (a sink contributes a method,
a source contributes an evented variable), and any structural change to
the probe set withdraws the previous interface and announces the new one.
Announcing one-by-one is quadratic in the number of probes; wrapping a
batch of changes in begin_adaptation/commit_adaptation defers publication
and only the net difference is announced.

The control interface is a fixed, ordinary service, so any peer holding a
proxy for it can restructure this composite remotely.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .bus import BusNode, CallResult, ServiceHandler
from .errors import (
    DuplicateExportName, NoOpenAdaptation, UnknownInstanceId, UnknownTypeId,
)
from .kernel import (
    ComponentBehavior, ComponentKind, ComponentTypeDescriptor, Container,
    Factory, PortSpec, assembly_from_doc, assembly_to_doc, binding_from_doc,
    descriptor_to_doc,
)
from .proxy import DisappearancePolicy, ProxySupervisor
from .values import ValueKind, default_for
from .wire import MethodSpec, ServiceDescription

SINK = "sink"
SOURCE = "source"

CONTROL_KIND = "slca:control:composite"
FUNCTIONAL_KIND_PREFIX = "slca:fn:"

CONTROL_METHODS: Tuple[MethodSpec, ...] = (
    MethodSpec("AddType", (("type_id", ValueKind.STRING),)),
    MethodSpec("RemoveType", (("type_id", ValueKind.STRING),)),
    MethodSpec("AddInstance", (("type_id", ValueKind.STRING),
                               ("instance_id", ValueKind.STRING),
                               ("properties", ValueKind.STRING))),
    MethodSpec("RemoveInstance", (("instance_id", ValueKind.STRING),)),
    MethodSpec("AddBinding", (("binding", ValueKind.STRING),),
               (ValueKind.STRING,)),
    MethodSpec("RemoveBinding", (("binding_id", ValueKind.STRING),)),
    MethodSpec("GetAssembly", (), (ValueKind.STRING,)),
    MethodSpec("ListTypes", (), (ValueKind.STRING,)),
    MethodSpec("BeginAdaptation", ()),
    MethodSpec("CommitAdaptation", ()),
)


@dataclass(frozen=True)
class ProbeBinding:
    probe_instance_id: str
    kind: str  # sink | source
    exported_name: str
    signature: Tuple[ValueKind, ...]


@dataclass
class CompositeManifest:
    composite_uid: str
    functional_services: List[ServiceDescription]
    control_service: ServiceDescription
    publication_mode: str  # immediate | batched


class TypeLibrary:
    """Node-local repository of component types loadable into composites.

    The control interface's AddType accepts only references into this
    library; component code never travels over the wire.
    """

    def __init__(self):
        self._entries: Dict[str, Tuple[ComponentTypeDescriptor, Optional[Factory]]] = {}

    def register(self, descriptor: ComponentTypeDescriptor,
                 factory: Optional[Factory] = None) -> None:
        descriptor.validate()
        self._entries[descriptor.type_id] = (descriptor, factory)

    def get(self, type_id: str) -> Tuple[ComponentTypeDescriptor, Optional[Factory]]:
        if type_id not in self._entries:
            raise UnknownTypeId(f"{type_id} is not in the node's type library")
        return self._entries[type_id]

    def type_ids(self) -> List[str]:
        return sorted(self._entries)

    def __contains__(self, type_id: str) -> bool:
        return type_id in self._entries


class _SourceBehavior(ComponentBehavior):
    """Probe source: assembly events become bus events."""

    def __init__(self, composite: "Composite", exported_name: str,
                 kind: ValueKind):
        self._composite = composite
        self.exported_name = exported_name
        self.last_value: Any = default_for(kind)

    def on_input(self, ctx, port_id, payload):
        self.last_value = payload[0]
        self._composite._publish_source(self.exported_name, payload[0])


class _FunctionalHandler(ServiceHandler):
    """Bus-facing side of one probe's service."""

    def __init__(self, composite: "Composite", probe: ProbeBinding):
        self._composite = composite
        self._probe = probe

    def call(self, method: str, args: Sequence[Any]):
        # sink method: invocation becomes an event in the assembly
        trace = self._composite.container.emit(
            self._probe.probe_instance_id, self._probe.exported_name, tuple(args))
        return CallResult([], trace_id=trace.trace_id)

    def read_variable(self, name: str):
        behavior = self._composite.container.behavior_of(
            self._probe.probe_instance_id)
        return behavior.last_value


class _ControlHandler(ServiceHandler):
    def __init__(self, composite: "Composite"):
        self._composite = composite

    def call(self, method: str, args: Sequence[Any]):
        return self._composite._control_call(method, list(args))


class Composite:
    """A container plus its two bus faces (functional + control)."""

    def __init__(self, bus: BusNode, name: str,
                 library: Optional[TypeLibrary] = None,
                 cycle_limit: int = 1024):
        self.bus = bus
        self.name = name
        self.library = library if library is not None else TypeLibrary()
        self.uid = f"{bus.name}:{name}"
        self.control_uid = f"{self.uid}:ctl"
        self.container = Container(name=self.uid, cycle_limit=cycle_limit)
        self._lock = threading.RLock()
        self._probes: Dict[str, ProbeBinding] = {}
        self._handlers: Dict[str, _FunctionalHandler] = {}
        self._advertised: Dict[str, ServiceDescription] = {}
        self._adaptation_open = False
        self._interface_listeners: List = []
        self._closed = False
        self.container.add_listener(self._on_container_event)
        self._control_description = ServiceDescription(
            service_uid=self.control_uid,
            friendly_name=f"{name} control",
            service_kinds=(CONTROL_KIND,),
            methods=CONTROL_METHODS,
            composite=True,
        )
        bus.advertise(self._control_description, _ControlHandler(self))

    # --- probes -----------------------------------------------------------

    def add_probe(self, kind: str, exported_name: str,
                  signature: Sequence[ValueKind]) -> ProbeBinding:
        signature = tuple(signature)
        descriptor = self._probe_descriptor(kind, exported_name, signature)
        with self._lock:
            self._check_export_free(kind, exported_name)
            if self.container.has_type(descriptor.type_id):
                if self.container.descriptor(descriptor.type_id) != descriptor:
                    # same name re-added with a new signature after removal
                    self.container.unregister_type(descriptor.type_id)
                    self.container.register_type(
                        descriptor, self._probe_factory(kind, exported_name, signature))
            else:
                self.container.register_type(
                    descriptor, self._probe_factory(kind, exported_name, signature))
            instance_id = f"{kind}-{exported_name}"
            self.container.instantiate(descriptor.type_id, instance_id)
            return self._probes[instance_id]

    def remove_probe(self, probe_instance_id: str) -> None:
        with self._lock:
            if probe_instance_id not in self._probes:
                raise UnknownInstanceId(probe_instance_id)
            self.container.destroy(probe_instance_id)

    def probes(self) -> List[ProbeBinding]:
        with self._lock:
            return list(self._probes.values())

    def _probe_descriptor(self, kind: str, name: str,
                          signature: Tuple[ValueKind, ...]) -> ComponentTypeDescriptor:
        if kind == SINK:
            return ComponentTypeDescriptor(
                type_id=f"{SINK}:{name}",
                outputs=(PortSpec.output(name, *signature),),
                kind=ComponentKind.PROBE_SINK,
            )
        if kind == SOURCE:
            if len(signature) != 1:
                raise ValueError("a source exports one evented variable, so its "
                                 f"signature must be one kind, got {signature}")
            return ComponentTypeDescriptor(
                type_id=f"{SOURCE}:{name}",
                inputs=(PortSpec.input(name, *signature),),
                kind=ComponentKind.PROBE_SOURCE,
            )
        raise ValueError(f"probe kind must be '{SINK}' or '{SOURCE}', got {kind!r}")

    def _probe_factory(self, kind: str, name: str,
                       signature: Tuple[ValueKind, ...]) -> Factory:
        if kind == SOURCE:
            return lambda: _SourceBehavior(self, name, signature[0])
        return ComponentBehavior  # sinks are passive; emissions come from the bus side

    def _check_export_free(self, kind: str, name: str) -> None:
        for probe in self._probes.values():
            if probe.kind == kind and probe.exported_name == name:
                raise DuplicateExportName(f"{kind} {name!r} already exported")

    # --- container listener -------------------------------------------------

    def _on_container_event(self, event: str, payload: dict) -> None:
        if event == "instance_added":
            descriptor = self.container.instance_descriptor(payload["instance_id"])
            if descriptor.kind is ComponentKind.PROBE_SINK:
                port = descriptor.outputs[0]
                self._track_probe(payload["instance_id"], SINK, port)
            elif descriptor.kind is ComponentKind.PROBE_SOURCE:
                port = descriptor.inputs[0]
                self._track_probe(payload["instance_id"], SOURCE, port)
        elif event == "instance_removed":
            with self._lock:
                probe = self._probes.pop(payload["instance_id"], None)
            if probe is not None:
                self._republish()

    def _track_probe(self, instance_id: str, kind: str, port: PortSpec) -> None:
        probe = ProbeBinding(instance_id, kind, port.port_id, port.param_types)
        with self._lock:
            self._probes[instance_id] = probe
        self._republish()

    # --- interface publication ------------------------------------------------

    def functional_uid(self, kind: str, exported_name: str) -> str:
        return f"{self.uid}:fn:{kind}:{exported_name}"

    def _functional_description(self, probe: ProbeBinding) -> ServiceDescription:
        uid = self.functional_uid(probe.kind, probe.exported_name)
        kinds = (FUNCTIONAL_KIND_PREFIX + probe.kind,
                 f"slca:composite:{self.name}")
        if probe.kind == SINK:
            return ServiceDescription(
                service_uid=uid,
                friendly_name=f"{self.name}/{probe.exported_name}",
                service_kinds=kinds,
                methods=(MethodSpec(
                    probe.exported_name,
                    tuple((f"arg{i}", k) for i, k in enumerate(probe.signature)),
                ),),
                composite=True,
            )
        return ServiceDescription(
            service_uid=uid,
            friendly_name=f"{self.name}/{probe.exported_name}",
            service_kinds=kinds,
            evented_variables=((probe.exported_name, probe.signature[0]),),
            composite=True,
        )

    def _desired_interface(self) -> Dict[str, Tuple[ServiceDescription, ProbeBinding]]:
        with self._lock:
            return {
                self.functional_uid(p.kind, p.exported_name):
                    (self._functional_description(p), p)
                for p in self._probes.values()
            }

    def _republish(self) -> None:
        with self._lock:
            if self._adaptation_open or self._closed:
                return
            desired = self._desired_interface()
            # the previous interface is no longer valid: say goodbye to all
            # of it, then announce every service of the new interface
            for uid in list(self._advertised):
                self.bus.withdraw(uid)
                del self._advertised[uid]
            for uid, (description, probe) in desired.items():
                handler = _FunctionalHandler(self, probe)
                self._handlers[uid] = handler
                self.bus.advertise(description, handler)
                self._advertised[uid] = description.with_endpoint(self.bus.endpoint)
        self._notify_interface()

    def begin_adaptation(self) -> None:
        with self._lock:
            self._adaptation_open = True

    def commit_adaptation(self) -> None:
        """Publish the net interface difference accumulated since begin.

        Services that survived the adaptation unchanged are left alone, so
        a no-op adaptation costs zero messages and a batch of n additions
        on a fresh composite costs exactly n.
        """
        with self._lock:
            if not self._adaptation_open:
                raise NoOpenAdaptation(self.uid)
            self._adaptation_open = False
            desired = self._desired_interface()
            for uid, description in dict(self._advertised).items():
                want = desired.get(uid)
                if want is None or \
                        want[0].with_endpoint(self.bus.endpoint) != description:
                    self.bus.withdraw(uid)
                    del self._advertised[uid]
            for uid, (description, probe) in desired.items():
                if uid in self._advertised:
                    continue
                handler = _FunctionalHandler(self, probe)
                self._handlers[uid] = handler
                self.bus.advertise(description, handler)
                self._advertised[uid] = description.with_endpoint(self.bus.endpoint)
        self._notify_interface()

    @property
    def publication_mode(self) -> str:
        return "batched" if self._adaptation_open else "immediate"

    def manifest(self) -> CompositeManifest:
        with self._lock:
            functional = [self._advertised[uid] for uid in sorted(self._advertised)]
        return CompositeManifest(
            composite_uid=self.uid,
            functional_services=functional,
            control_service=self._control_description.with_endpoint(self.bus.endpoint),
            publication_mode=self.publication_mode,
        )

    def _publish_source(self, exported_name: str, value: Any) -> None:
        uid = self.functional_uid(SOURCE, exported_name)
        with self._lock:
            advertised = uid in self._advertised
        if advertised:
            self.bus.publish(uid, exported_name, value)

    def add_interface_listener(self, listener) -> None:
        """listener(manifest) runs after every interface (re)publication."""
        self._interface_listeners.append(listener)

    def _notify_interface(self) -> None:
        for listener in list(self._interface_listeners):
            listener(self.manifest())

    # --- control interface -----------------------------------------------------

    def _control_call(self, method: str, args: List[Any]):
        if method == "AddType":
            descriptor, factory = self.library.get(args[0])
            self.container.register_type(descriptor, factory)
            return []
        if method == "RemoveType":
            self.container.unregister_type(args[0])
            return []
        if method == "AddInstance":
            type_id, instance_id, properties_json = args
            properties = json.loads(properties_json) if properties_json else {}
            descriptor = self.container.descriptor(type_id)
            if descriptor.kind is ComponentKind.PROBE_SINK:
                self._check_export_free(SINK, descriptor.outputs[0].port_id)
            elif descriptor.kind is ComponentKind.PROBE_SOURCE:
                self._check_export_free(SOURCE, descriptor.inputs[0].port_id)
            self.container.instantiate(type_id, instance_id, properties)
            return []
        if method == "RemoveInstance":
            self.container.destroy(args[0])
            return []
        if method == "AddBinding":
            binding = binding_from_doc(json.loads(args[0]))
            return [self.container.add_binding(binding)]
        if method == "RemoveBinding":
            self.container.remove_binding(args[0])
            return []
        if method == "GetAssembly":
            return [self.assembly_document()]
        if method == "ListTypes":
            docs = [descriptor_to_doc(d) for d in self.container.list_types()]
            docs.sort(key=lambda d: d["type_id"])
            return [json.dumps(docs, sort_keys=True, separators=(",", ":"))]
        if method == "BeginAdaptation":
            self.begin_adaptation()
            return []
        if method == "CommitAdaptation":
            self.commit_adaptation()
            return []
        raise UnknownTypeId(f"control method {method} not implemented")

    def assembly_document(self) -> str:
        doc = assembly_to_doc(self.container.snapshot())
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    # --- lifecycle ---------------------------------------------------------------

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            advertised = list(self._advertised)
            self._advertised.clear()
        for uid in advertised:
            self.bus.withdraw(uid)
        self.bus.withdraw(self.control_uid)


def create_composite(bus: BusNode, name: str,
                     library: Optional[TypeLibrary] = None) -> Composite:
    return Composite(bus, name, library)


def compose_hierarchy(parent: Composite, child_functional_uid: str,
                      instance_id: Optional[str] = None,
                      supervisor: Optional[ProxySupervisor] = None,
                      policy: Optional[DisappearancePolicy] = None):
    """Proxy a child composite's functional service into a parent composite.

    Returns (instance_id, supervisor). Reuse the returned supervisor for
    further children of the same parent.
    """
    if supervisor is None:
        supervisor = ProxySupervisor(parent.container, parent.bus)
    if policy is None:
        policy = DisappearancePolicy("remove")
    instance_id = instance_id or f"proxy-{child_functional_uid}"
    supervisor.instantiate(child_functional_uid, instance_id, policy)
    return instance_id, supervisor


class ControlClient:
    """Typed convenience wrapper over a remote control service."""

    def __init__(self, bus: BusNode, control_uid: str):
        self.bus = bus
        self.control_uid = control_uid

    def add_type(self, type_id: str) -> None:
        self.bus.invoke(self.control_uid, "AddType", [type_id])

    def remove_type(self, type_id: str) -> None:
        self.bus.invoke(self.control_uid, "RemoveType", [type_id])

    def add_instance(self, type_id: str, instance_id: str,
                     properties: Optional[dict] = None) -> None:
        payload = json.dumps(properties or {})
        self.bus.invoke(self.control_uid, "AddInstance",
                        [type_id, instance_id, payload])

    def remove_instance(self, instance_id: str) -> None:
        self.bus.invoke(self.control_uid, "RemoveInstance", [instance_id])

    def add_binding(self, source: str, targets: Sequence[str],
                    binding_id: Optional[str] = None) -> str:
        doc = {
            "binding_id": binding_id,
            "source": _endpoint_doc(source),
            "targets": [_endpoint_doc(t) for t in targets],
        }
        returns = self.bus.invoke(self.control_uid, "AddBinding",
                                  [json.dumps(doc)])
        return returns[0]

    def remove_binding(self, binding_id: str) -> None:
        self.bus.invoke(self.control_uid, "RemoveBinding", [binding_id])

    def get_assembly(self) -> dict:
        returns = self.bus.invoke(self.control_uid, "GetAssembly", [])
        return json.loads(returns[0])

    def get_assembly_graph(self):
        return assembly_from_doc(self.get_assembly())

    def list_types(self) -> List[dict]:
        returns = self.bus.invoke(self.control_uid, "ListTypes", [])
        return json.loads(returns[0])

    def begin_adaptation(self) -> None:
        self.bus.invoke(self.control_uid, "BeginAdaptation", [])

    def commit_adaptation(self) -> None:
        self.bus.invoke(self.control_uid, "CommitAdaptation", [])


def _endpoint_doc(text: str) -> dict:
    instance_id, _, port_id = text.rpartition(".")
    return {"instance_id": instance_id, "port_id": port_id}
