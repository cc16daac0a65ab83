"""In-process lightweight component kernel.

Components are black boxes with typed input ports (methods), typed output
ports (events) and properties. They interact only through bindings, and a
binding delivers an emission as a plain synchronous function call: no
middleware code lives inside a component. A Container is one dispatch
domain; every mutation and every emission is serialized, so handler code
always runs alone in its container.

Dispatch order is fixed (not left undefined): depth-first, targets in
declared order inside a binding, bindings in insertion order on a port.
Assemblies needing a guaranteed fan-out order should still route through
sequence components, which forward to their outputs in declared order.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    BadPropertyValue, CycleLimitExceeded, DuplicateBindingId,
    DuplicateInstanceId, DuplicateTypeId, MalformedBinding,
    MalformedDescriptor, PayloadTypeError, TypeMismatch, UnknownBindingId,
    UnknownEndpoint, UnknownInstanceId, UnknownProperty, UnknownTypeId,
)
from .values import (
    ValueKind, coerce, conforms, encode_value, encode_values, decode_value,
    freeze_payload, kind_of,
)

DEFAULT_CYCLE_LIMIT = 1024


class PortDirection(str, Enum):
    INPUT = "input"
    OUTPUT = "output"


class ComponentKind(str, Enum):
    BASIC = "basic"
    PROXY = "proxy"
    PROBE_SINK = "probe_sink"
    PROBE_SOURCE = "probe_source"
    SEQUENCE = "sequence"


@dataclass(frozen=True)
class PortSpec:
    """A typed port: input ports receive calls, output ports emit events."""

    port_id: str
    direction: PortDirection
    param_types: Tuple[ValueKind, ...] = ()
    doc: str = ""

    @staticmethod
    def input(port_id: str, *param_types: ValueKind, doc: str = "") -> "PortSpec":
        return PortSpec(port_id, PortDirection.INPUT, tuple(param_types), doc)

    @staticmethod
    def output(port_id: str, *param_types: ValueKind, doc: str = "") -> "PortSpec":
        return PortSpec(port_id, PortDirection.OUTPUT, tuple(param_types), doc)


@dataclass(frozen=True)
class PropertySpec:
    name: str
    kind: ValueKind
    default: Any = None

    def __post_init__(self):
        if self.default is None:
            object.__setattr__(self, "default", _kind_default(self.kind))


def _kind_default(kind: ValueKind) -> Any:
    from .values import default_for
    return default_for(kind)


@dataclass(frozen=True)
class ComponentTypeDescriptor:
    """Shape of a component type: its ports, properties and kind."""

    type_id: str
    inputs: Tuple[PortSpec, ...] = ()
    outputs: Tuple[PortSpec, ...] = ()
    properties: Tuple[PropertySpec, ...] = ()
    kind: ComponentKind = ComponentKind.BASIC

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "properties", tuple(self.properties))

    def validate(self) -> None:
        if not self.type_id:
            raise MalformedDescriptor("type_id must be non-empty")
        for ports, direction in ((self.inputs, PortDirection.INPUT),
                                 (self.outputs, PortDirection.OUTPUT)):
            seen = set()
            for port in ports:
                if port.direction != direction:
                    raise MalformedDescriptor(
                        f"{self.type_id}: port {port.port_id!r} listed under {direction.value}"
                        f" but declares {port.direction.value}")
                if port.port_id in seen:
                    raise MalformedDescriptor(
                        f"{self.type_id}: duplicate {direction.value} port {port.port_id!r}")
                seen.add(port.port_id)
        names = set()
        for prop in self.properties:
            if prop.name in names:
                raise MalformedDescriptor(f"{self.type_id}: duplicate property {prop.name!r}")
            names.add(prop.name)
            if not conforms(prop.default, prop.kind):
                raise MalformedDescriptor(
                    f"{self.type_id}: default {prop.default!r} not a {prop.kind}")
        if self.kind is ComponentKind.SEQUENCE:
            if len(self.inputs) != 1 or len(self.outputs) < 2:
                raise MalformedDescriptor(
                    f"{self.type_id}: sequence needs exactly 1 input and >=2 outputs")
            expected = self.inputs[0].param_types
            for port in self.outputs:
                if port.param_types != expected:
                    raise MalformedDescriptor(
                        f"{self.type_id}: sequence output {port.port_id!r} param types differ")
        elif self.kind is ComponentKind.PROBE_SINK:
            if self.inputs or len(self.outputs) != 1:
                raise MalformedDescriptor(
                    f"{self.type_id}: probe sink must have no inputs and exactly 1 output")
        elif self.kind is ComponentKind.PROBE_SOURCE:
            if self.outputs or len(self.inputs) != 1:
                raise MalformedDescriptor(
                    f"{self.type_id}: probe source must have exactly 1 input and no outputs")

    def input_port(self, port_id: str) -> PortSpec:
        for port in self.inputs:
            if port.port_id == port_id:
                return port
        raise UnknownEndpoint(f"{self.type_id} has no input port {port_id!r}")

    def output_port(self, port_id: str) -> PortSpec:
        for port in self.outputs:
            if port.port_id == port_id:
                return port
        raise UnknownEndpoint(f"{self.type_id} has no output port {port_id!r}")

    def property_spec(self, name: str) -> PropertySpec:
        for prop in self.properties:
            if prop.name == name:
                return prop
        raise UnknownProperty(f"{self.type_id} declares no property {name!r}")


@dataclass
class ComponentInstance:
    instance_id: str
    type_id: str
    property_values: Dict[str, Any] = field(default_factory=dict)
    user_state: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Endpoint:
    instance_id: str
    port_id: str

    def __str__(self) -> str:
        return f"{self.instance_id}.{self.port_id}"


@dataclass(frozen=True)
class Binding:
    """Late-bound link from one output port to one or more input ports."""

    source: Endpoint
    targets: Tuple[Endpoint, ...]
    binding_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise MalformedBinding("binding needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise MalformedBinding("binding targets a port twice")


@dataclass
class AssemblyGraph:
    """Point-in-time copy of a container's contents."""

    types: List[ComponentTypeDescriptor]
    instances: List[ComponentInstance]
    bindings: List[Binding]

    def instance_ids(self) -> List[str]:
        return [i.instance_id for i in self.instances]

    def binding_ids(self) -> List[str]:
        return [b.binding_id for b in self.bindings]


@dataclass(frozen=True)
class TraceEvent:
    instance_id: str
    port_id: str
    payload: Tuple[Any, ...]
    t: int


@dataclass
class DispatchTrace:
    """Every emission and delivery of one root dispatch, in order."""

    trace_id: str
    root: Endpoint
    events: List[TraceEvent] = field(default_factory=list)
    _delivery_ts: set = field(default_factory=set, repr=False)

    def delivery_count(self) -> int:
        return len(self.deliveries())

    def deliveries(self) -> List[TraceEvent]:
        return [e for e in self.events if e.t in self._delivery_ts]

    def emissions(self) -> List[TraceEvent]:
        return [e for e in self.events if e.t not in self._delivery_ts]

    def as_pairs(self) -> List[Tuple[str, str]]:
        return [(e.instance_id, e.port_id) for e in self.events]

    def canonical_json(self) -> bytes:
        """Stable byte encoding used by the determinism checks."""
        doc = {
            "root": str(self.root),
            "events": [
                {
                    "instance": e.instance_id,
                    "port": e.port_id,
                    "payload": encode_values(e.payload),
                    "t": e.t,
                }
                for e in self.events
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


class ComponentContext:
    """Handle given to component code: emit events, touch properties."""

    def __init__(self, container: "Container", instance_id: str):
        self._container = container
        self.instance_id = instance_id

    def emit(self, port_id: str, payload: Sequence[Any] = ()) -> None:
        self._container.emit(self.instance_id, port_id, payload)

    def get_property(self, name: str) -> Any:
        return self._container.get_property(self.instance_id, name)

    def set_property(self, name: str, value: Any) -> None:
        self._container.set_property(self.instance_id, name, value)

    @property
    def user_state(self) -> Dict[str, Any]:
        return self._container._live(self.instance_id).instance.user_state


class ComponentBehavior:
    """Base for component implementations. Subclass and override on_input."""

    def setup(self, ctx: ComponentContext) -> None:
        pass

    def on_input(self, ctx: ComponentContext, port_id: str, payload: Tuple[Any, ...]) -> None:
        pass

    def teardown(self, ctx: ComponentContext) -> None:
        pass


class SequenceBehavior(ComponentBehavior):
    """Forwards the input payload to every output port, in declared order."""

    def __init__(self, output_ids: Sequence[str]):
        self._output_ids = tuple(output_ids)

    def on_input(self, ctx, port_id, payload):
        for out in self._output_ids:
            ctx.emit(out, payload)


Factory = Callable[[], ComponentBehavior]
Listener = Callable[[str, dict], None]
TraceListener = Callable[[DispatchTrace], None]


class _LiveInstance:
    __slots__ = ("instance", "descriptor", "behavior", "ctx")

    def __init__(self, instance, descriptor, behavior, ctx):
        self.instance = instance
        self.descriptor = descriptor
        self.behavior = behavior
        self.ctx = ctx


class _DispatchState:
    __slots__ = ("trace", "depth", "clock")

    def __init__(self, trace: DispatchTrace):
        self.trace = trace
        self.depth = 0
        self.clock = itertools.count()


class Container:
    """Single dispatch domain holding a component assembly.

    All operations are serialized; callers from any thread may invoke them
    and block until completion. Handler code therefore must not block on
    work that needs this same container from another thread.
    """

    def __init__(self, name: str = "container", cycle_limit: int = DEFAULT_CYCLE_LIMIT):
        self.name = name
        self.cycle_limit = cycle_limit
        self._lock = threading.RLock()
        self._types: Dict[str, Tuple[ComponentTypeDescriptor, Optional[Factory]]] = {}
        self._instances: Dict[str, _LiveInstance] = {}
        self._bindings: Dict[str, Binding] = {}
        self._by_source: Dict[Tuple[str, str], List[str]] = {}
        self._binding_seq = itertools.count(1)
        self._emit_seq = itertools.count(1)
        self._dispatch: Optional[_DispatchState] = None
        self._listeners: List[Listener] = []
        self._trace_listeners: List[TraceListener] = []

    # --- type repository ---------------------------------------------------

    def register_type(self, descriptor: ComponentTypeDescriptor,
                      factory: Optional[Factory] = None) -> None:
        descriptor.validate()
        with self._lock:
            if descriptor.type_id in self._types:
                raise DuplicateTypeId(descriptor.type_id)
            self._types[descriptor.type_id] = (descriptor, factory)
            self._notify("type_registered", {"type_id": descriptor.type_id})

    def unregister_type(self, type_id: str) -> None:
        with self._lock:
            if type_id not in self._types:
                raise UnknownTypeId(type_id)
            del self._types[type_id]
            self._notify("type_unregistered", {"type_id": type_id})

    def has_type(self, type_id: str) -> bool:
        with self._lock:
            return type_id in self._types

    def list_types(self) -> List[ComponentTypeDescriptor]:
        with self._lock:
            return [desc for desc, _ in self._types.values()]

    def descriptor(self, type_id: str) -> ComponentTypeDescriptor:
        with self._lock:
            if type_id not in self._types:
                raise UnknownTypeId(type_id)
            return self._types[type_id][0]

    def type_entry(self, type_id: str) -> Tuple[ComponentTypeDescriptor, Optional[Factory]]:
        with self._lock:
            if type_id not in self._types:
                raise UnknownTypeId(type_id)
            return self._types[type_id]

    # --- instances -----------------------------------------------------------

    def instantiate(self, type_id: str, instance_id: str,
                    initial_properties: Optional[Dict[str, Any]] = None) -> ComponentInstance:
        with self._lock:
            if type_id not in self._types:
                raise UnknownTypeId(type_id)
            if instance_id in self._instances:
                raise DuplicateInstanceId(instance_id)
            descriptor, factory = self._types[type_id]
            values = {p.name: p.default for p in descriptor.properties}
            for name, value in (initial_properties or {}).items():
                spec = descriptor.property_spec(name)
                if not conforms(value, spec.kind):
                    raise BadPropertyValue(f"{name}={value!r} is not a {spec.kind}")
                values[name] = coerce(value, spec.kind)
            behavior = self._make_behavior(descriptor, factory)
            instance = ComponentInstance(instance_id, type_id, values)
            ctx = ComponentContext(self, instance_id)
            self._instances[instance_id] = _LiveInstance(instance, descriptor, behavior, ctx)
            behavior.setup(ctx)
            self._notify("instance_added", {"instance_id": instance_id, "type_id": type_id})
            return instance

    @staticmethod
    def _make_behavior(descriptor: ComponentTypeDescriptor,
                       factory: Optional[Factory]) -> ComponentBehavior:
        if factory is not None:
            return factory()
        if descriptor.kind is ComponentKind.SEQUENCE:
            return SequenceBehavior([p.port_id for p in descriptor.outputs])
        return ComponentBehavior()

    def destroy(self, instance_id: str) -> None:
        with self._lock:
            live = self._instances.get(instance_id)
            if live is None:
                raise UnknownInstanceId(instance_id)
            doomed = [bid for bid, b in self._bindings.items()
                      if b.source.instance_id == instance_id
                      or any(t.instance_id == instance_id for t in b.targets)]
            for bid in doomed:
                self._drop_binding(bid)
            del self._instances[instance_id]
            live.behavior.teardown(live.ctx)
            self._notify("instance_removed",
                         {"instance_id": instance_id, "type_id": live.instance.type_id})

    def has_instance(self, instance_id: str) -> bool:
        with self._lock:
            return instance_id in self._instances

    def _live(self, instance_id: str) -> _LiveInstance:
        live = self._instances.get(instance_id)
        if live is None:
            raise UnknownInstanceId(instance_id)
        return live

    def instance_descriptor(self, instance_id: str) -> ComponentTypeDescriptor:
        with self._lock:
            return self._live(instance_id).descriptor

    def behavior_of(self, instance_id: str) -> ComponentBehavior:
        with self._lock:
            return self._live(instance_id).behavior

    # --- properties ----------------------------------------------------------

    def set_property(self, instance_id: str, name: str, value: Any) -> None:
        with self._lock:
            live = self._live(instance_id)
            spec = live.descriptor.property_spec(name)
            if not conforms(value, spec.kind):
                raise BadPropertyValue(f"{name}={value!r} is not a {spec.kind}")
            live.instance.property_values[name] = coerce(value, spec.kind)

    def get_property(self, instance_id: str, name: str) -> Any:
        with self._lock:
            live = self._live(instance_id)
            live.descriptor.property_spec(name)
            return live.instance.property_values[name]

    # --- bindings ------------------------------------------------------------

    def add_binding(self, binding: Binding) -> str:
        with self._lock:
            binding_id = binding.binding_id or f"b{next(self._binding_seq)}"
            if binding_id in self._bindings:
                raise DuplicateBindingId(binding_id)
            source_live = self._instances.get(binding.source.instance_id)
            if source_live is None:
                raise UnknownEndpoint(f"no instance {binding.source.instance_id!r}")
            source_port = source_live.descriptor.output_port(binding.source.port_id)
            for target in binding.targets:
                target_live = self._instances.get(target.instance_id)
                if target_live is None:
                    raise UnknownEndpoint(f"no instance {target.instance_id!r}")
                target_port = target_live.descriptor.input_port(target.port_id)
                if target_port.param_types != source_port.param_types:
                    raise TypeMismatch(
                        f"{binding.source} {_sig(source_port.param_types)} -> "
                        f"{target} {_sig(target_port.param_types)}")
            stored = Binding(binding.source, binding.targets, binding_id)
            self._bindings[binding_id] = stored
            key = (binding.source.instance_id, binding.source.port_id)
            self._by_source.setdefault(key, []).append(binding_id)
            self._notify("binding_added", {"binding_id": binding_id,
                                           "source": str(binding.source),
                                           "targets": [str(t) for t in binding.targets]})
            return binding_id

    def bind(self, source: str, *targets: str, binding_id: Optional[str] = None) -> str:
        """Convenience: endpoints as 'instance.port' strings."""
        return self.add_binding(Binding(_parse_endpoint(source),
                                        tuple(_parse_endpoint(t) for t in targets),
                                        binding_id))

    def remove_binding(self, binding_id: str) -> None:
        with self._lock:
            if binding_id not in self._bindings:
                raise UnknownBindingId(binding_id)
            self._drop_binding(binding_id)

    def _drop_binding(self, binding_id: str) -> None:
        binding = self._bindings.pop(binding_id)
        key = (binding.source.instance_id, binding.source.port_id)
        ids = self._by_source.get(key)
        if ids is not None:
            ids.remove(binding_id)
            if not ids:
                del self._by_source[key]
        self._notify("binding_removed", {"binding_id": binding_id})

    # --- dispatch --------------------------------------------------------------

    def emit(self, instance_id: str, port_id: str,
             payload: Sequence[Any] = ()) -> DispatchTrace:
        with self._lock:
            live = self._instances.get(instance_id)
            if live is None:
                raise UnknownEndpoint(f"no instance {instance_id!r}")
            port = live.descriptor.output_port(port_id)
            try:
                frozen = freeze_payload(payload, port.param_types)
            except ValueError as exc:
                raise PayloadTypeError(f"{instance_id}.{port_id}: {exc}") from None

            root_dispatch = self._dispatch is None
            if root_dispatch:
                trace_id = f"{self.name}:{next(self._emit_seq)}"
                self._dispatch = _DispatchState(
                    DispatchTrace(trace_id, Endpoint(instance_id, port_id)))
            state = self._dispatch
            try:
                self._emit_inner(state, instance_id, port_id, port, frozen)
            finally:
                if root_dispatch:
                    self._dispatch = None
            if root_dispatch:
                for listener in list(self._trace_listeners):
                    listener(state.trace)
            return state.trace

    def _emit_inner(self, state: _DispatchState, instance_id: str, port_id: str,
                    port: PortSpec, payload: Tuple[Any, ...]) -> None:
        state.trace.events.append(
            TraceEvent(instance_id, port_id, payload, next(state.clock)))
        for binding_id in list(self._by_source.get((instance_id, port_id), ())):
            binding = self._bindings.get(binding_id)
            if binding is None:  # removed mid-cascade
                continue
            for target in binding.targets:
                if self._bindings.get(binding_id) is None:
                    break
                target_live = self._instances.get(target.instance_id)
                if target_live is None:  # destroyed mid-cascade
                    continue
                if __debug__:
                    target_port = target_live.descriptor.input_port(target.port_id)
                    assert target_port.param_types == port.param_types, \
                        f"type-safety violation on {binding_id}"
                self._deliver(state, target_live, target.port_id, payload)

    def _deliver(self, state: _DispatchState, live: _LiveInstance,
                 port_id: str, payload: Tuple[Any, ...]) -> None:
        if state.depth + 1 > self.cycle_limit:
            raise CycleLimitExceeded(
                f"dispatch exceeded {self.cycle_limit} frames (cycle in assembly?)")
        t = next(state.clock)
        state.trace.events.append(
            TraceEvent(live.instance.instance_id, port_id, payload, t))
        state.trace._delivery_ts.add(t)
        state.depth += 1
        try:
            live.behavior.on_input(live.ctx, port_id, payload)
        finally:
            state.depth -= 1

    # --- introspection -----------------------------------------------------------

    def snapshot(self) -> AssemblyGraph:
        with self._lock:
            types = [desc for desc, _ in self._types.values()]
            instances = [
                ComponentInstance(
                    live.instance.instance_id,
                    live.instance.type_id,
                    dict(live.instance.property_values),
                    live.instance.user_state,
                )
                for live in self._instances.values()
            ]
            bindings = list(self._bindings.values())
            return AssemblyGraph(types, instances, bindings)

    def add_listener(self, listener: Listener) -> None:
        self._listeners.append(listener)

    def remove_listener(self, listener: Listener) -> None:
        self._listeners.remove(listener)

    def add_trace_listener(self, listener: TraceListener) -> None:
        self._trace_listeners.append(listener)

    def _notify(self, event: str, payload: dict) -> None:
        for listener in list(self._listeners):
            listener(event, payload)


def _sig(param_types: Iterable[ValueKind]) -> str:
    return "(" + ",".join(str(k) for k in param_types) + ")"


def _parse_endpoint(text: str) -> Endpoint:
    instance_id, sep, port_id = text.rpartition(".")
    if not sep or not instance_id or not port_id:
        raise UnknownEndpoint(f"endpoint must look like 'instance.port', got {text!r}")
    return Endpoint(instance_id, port_id)


# --- assembly documents -------------------------------------------------------
# Canonical JSON form of an AssemblyGraph; the control interface's GetAssembly
# returns this document and it round-trips losslessly.

def port_to_doc(port: PortSpec) -> dict:
    return {
        "port_id": port.port_id,
        "direction": port.direction.value,
        "param_types": [str(k) for k in port.param_types],
        "doc": port.doc,
    }


def port_from_doc(doc: dict) -> PortSpec:
    return PortSpec(
        doc["port_id"],
        PortDirection(doc["direction"]),
        tuple(kind_of(k) for k in doc["param_types"]),
        doc.get("doc", ""),
    )


def descriptor_to_doc(desc: ComponentTypeDescriptor) -> dict:
    return {
        "type_id": desc.type_id,
        "kind": desc.kind.value,
        "inputs": [port_to_doc(p) for p in desc.inputs],
        "outputs": [port_to_doc(p) for p in desc.outputs],
        "properties": [
            {"name": p.name, "kind": str(p.kind), "default": encode_value(p.default)}
            for p in desc.properties
        ],
    }


def descriptor_from_doc(doc: dict) -> ComponentTypeDescriptor:
    return ComponentTypeDescriptor(
        type_id=doc["type_id"],
        kind=ComponentKind(doc["kind"]),
        inputs=tuple(port_from_doc(p) for p in doc["inputs"]),
        outputs=tuple(port_from_doc(p) for p in doc["outputs"]),
        properties=tuple(
            PropertySpec(p["name"], kind_of(p["kind"]), decode_value(p["default"]))
            for p in doc["properties"]
        ),
    )


def binding_to_doc(binding: Binding) -> dict:
    return {
        "binding_id": binding.binding_id,
        "source": {"instance_id": binding.source.instance_id,
                   "port_id": binding.source.port_id},
        "targets": [{"instance_id": t.instance_id, "port_id": t.port_id}
                    for t in binding.targets],
    }


def binding_from_doc(doc: dict) -> Binding:
    return Binding(
        Endpoint(doc["source"]["instance_id"], doc["source"]["port_id"]),
        tuple(Endpoint(t["instance_id"], t["port_id"]) for t in doc["targets"]),
        doc.get("binding_id"),
    )


def assembly_to_doc(graph: AssemblyGraph) -> dict:
    return {
        "types": sorted((descriptor_to_doc(t) for t in graph.types),
                        key=lambda d: d["type_id"]),
        "instances": sorted(
            (
                {
                    "instance_id": i.instance_id,
                    "type_id": i.type_id,
                    "property_values": {k: encode_value(v)
                                        for k, v in sorted(i.property_values.items())},
                }
                for i in graph.instances
            ),
            key=lambda d: d["instance_id"],
        ),
        "bindings": sorted((binding_to_doc(b) for b in graph.bindings),
                           key=lambda d: d["binding_id"] or ""),
    }


def assembly_from_doc(doc: dict) -> AssemblyGraph:
    return AssemblyGraph(
        types=[descriptor_from_doc(t) for t in doc["types"]],
        instances=[
            ComponentInstance(
                i["instance_id"], i["type_id"],
                {k: decode_value(v) for k, v in i["property_values"].items()},
            )
            for i in doc["instances"]
        ],
        bindings=[binding_from_doc(b) for b in doc["bindings"]],
    )


def make_sequence_descriptor(type_id: str, param_types: Sequence[ValueKind],
                             fanout: int = 2) -> ComponentTypeDescriptor:
    """Descriptor for a sequence component with the given fan-out."""
    if fanout < 2:
        raise MalformedDescriptor("sequence fan-out must be >= 2")
    kinds = tuple(param_types)
    return ComponentTypeDescriptor(
        type_id=type_id,
        inputs=(PortSpec("in", PortDirection.INPUT, kinds),),
        outputs=tuple(PortSpec(f"out{i + 1}", PortDirection.OUTPUT, kinds)
                      for i in range(fanout)),
        kind=ComponentKind.SEQUENCE,
    )
