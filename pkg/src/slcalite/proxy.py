"""Proxy components: discovered services become bindable components.

A generated proxy type has one input port per remote method (calling the
port invokes the method over the bus) and one output port per evented
variable (bus events are re-emitted into the assembly). Generation is
pure: no code is emitted, the behavior simply closes over the bus client.

When the remote service disappears a proxy either freezes (calls fail
fast with ProxyFrozen until a compatible replacement is rebound) or is
removed from the assembly, cascading its bindings.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .bus import BusNode, ServiceSighting
from .errors import (
    MalformedDescription, ProxyFrozen, ServiceUnavailable, SlcaError,
    UnknownInstanceId,
)
from .kernel import (
    ComponentBehavior, ComponentContext, ComponentKind, ComponentTypeDescriptor,
    Container, PortSpec, PropertySpec,
)
from .values import ValueKind
from .wire import MethodSpec, ServiceDescription, kind_matches

EVENT_PORT_PREFIX = "evt_"

FREEZE = "freeze"
REMOVE = "remove"


@dataclass(frozen=True)
class DisappearancePolicy:
    mode: str  # freeze | remove
    compatibility_filter: str = ""

    def __post_init__(self):
        if self.mode not in (FREEZE, REMOVE):
            raise ValueError(f"unknown disappearance mode {self.mode!r}")
        if self.mode == FREEZE and not self.compatibility_filter:
            raise ValueError("freeze mode requires a compatibility filter")


@dataclass(frozen=True)
class ProxyTypeMapping:
    service_uid: str
    type_id: str
    method_ports: Tuple[Tuple[str, str], ...]   # (method name, input port)
    event_ports: Tuple[Tuple[str, str], ...]    # (variable name, output port)
    service_kinds: Tuple[str, ...]
    methods: Tuple[MethodSpec, ...]
    evented_variables: Tuple[Tuple[str, ValueKind], ...]
    generated_at: float = 0.0


def generate_proxy_type(description: ServiceDescription,
                        generated_at: float = 0.0,
                        ) -> Tuple[ComponentTypeDescriptor, ProxyTypeMapping]:
    """Derive a proxy component type from a service description."""
    method_names = [m.name for m in description.methods]
    if len(set(method_names)) != len(method_names):
        raise MalformedDescription(f"{description.service_uid}: duplicate method names")
    var_names = [n for n, _ in description.evented_variables]
    if len(set(var_names)) != len(var_names):
        raise MalformedDescription(
            f"{description.service_uid}: duplicate evented variable names")
    event_port_names = {EVENT_PORT_PREFIX + n for n in var_names}
    collisions = event_port_names & set(method_names)
    if collisions:
        raise MalformedDescription(
            f"{description.service_uid}: method name collides with derived "
            f"event port {sorted(collisions)}")

    inputs = tuple(
        PortSpec.input(m.name, *m.param_kinds, doc=f"invokes {m.name} on the service")
        for m in description.methods)
    outputs = tuple(
        PortSpec.output(EVENT_PORT_PREFIX + name, kind,
                        doc=f"re-emits service events for {name}")
        for name, kind in description.evented_variables)
    descriptor = ComponentTypeDescriptor(
        type_id=f"proxy:{description.service_uid}",
        inputs=inputs,
        outputs=outputs,
        properties=(PropertySpec("remote_timeout_ms", ValueKind.INT, 5000),),
        kind=ComponentKind.PROXY,
    )
    descriptor.validate()
    mapping = ProxyTypeMapping(
        service_uid=description.service_uid,
        type_id=descriptor.type_id,
        method_ports=tuple((m.name, m.name) for m in description.methods),
        event_ports=tuple((n, EVENT_PORT_PREFIX + n)
                          for n, _ in description.evented_variables),
        service_kinds=description.service_kinds,
        methods=description.methods,
        evented_variables=description.evented_variables,
        generated_at=generated_at,
    )
    return descriptor, mapping


def is_compatible(mapping: ProxyTypeMapping, candidate: ServiceDescription,
                  compatibility_filter: str) -> bool:
    """Same kind filter plus method/variable superset by (name, signature)."""
    if not kind_matches(compatibility_filter, candidate.service_kinds):
        return False
    for method in mapping.methods:
        other = candidate.method(method.name)
        if other is None or other.param_kinds != method.param_kinds \
                or other.returns != method.returns:
            return False
    for name, kind in mapping.evented_variables:
        if candidate.variable_kind(name) != kind:
            return False
    return True


class ProxyBehavior(ComponentBehavior):
    """Bridges one remote service into the assembly."""

    def __init__(self, bus: BusNode, mapping: ProxyTypeMapping):
        self._bus = bus
        self.mapping = mapping
        self.service_uid = mapping.service_uid
        self.frozen = False
        self.policy: Optional[DisappearancePolicy] = None
        self._ctx: Optional[ComponentContext] = None
        self._subscription_ids: List[str] = []
        self._lock = threading.RLock()

    def setup(self, ctx: ComponentContext) -> None:
        self._ctx = ctx

    def connect(self) -> None:
        """Subscribe to every evented variable; emits initial-state events."""
        with self._lock:
            for variable, port in self.mapping.event_ports:
                sub = self._bus.subscribe(
                    self.service_uid, variable,
                    self._make_event_callback(port))
                self._subscription_ids.append(sub.subscription_id)

    def _make_event_callback(self, port: str) -> Callable:
        def deliver(variable: str, value, seq: int) -> None:
            if self.frozen or self._ctx is None:
                return  # emissions are suspended while frozen
            # re-emission is serialized by the owning container
            self._ctx.emit(port, (value,))
        return deliver

    def on_input(self, ctx: ComponentContext, port_id: str, payload) -> None:
        if self.frozen:
            raise ProxyFrozen(
                f"{ctx.instance_id}: service {self.service_uid} is lost; "
                "call rejected until a compatible service is rebound")
        self._bus.invoke(self.service_uid, port_id, list(payload))

    def teardown(self, ctx: ComponentContext) -> None:
        self._drop_subscriptions()

    def freeze(self, policy: DisappearancePolicy) -> None:
        with self._lock:
            self.frozen = True
            self.policy = policy
            self._drop_subscriptions()

    def rebind(self, candidate: ServiceDescription) -> bool:
        with self._lock:
            if not self.frozen or self.policy is None:
                return False
            if not is_compatible(self.mapping, candidate,
                                 self.policy.compatibility_filter):
                return False
            self.service_uid = candidate.service_uid
            self.frozen = False
            try:
                self.connect()
            except SlcaError:
                self.frozen = True
                return False
            return True

    def _drop_subscriptions(self) -> None:
        subs, self._subscription_ids = self._subscription_ids, []
        for sub_id in subs:
            try:
                self._bus.unsubscribe(sub_id)
            except SlcaError:
                pass  # service vanished with its subscriptions

    @property
    def subscription_count(self) -> int:
        return len(self._subscription_ids)


def instantiate_proxy(container: Container, bus: BusNode,
                      mapping: ProxyTypeMapping, instance_id: str,
                      initial_properties: Optional[dict] = None):
    """Create a live proxy instance bound to the mapped service."""
    description = bus.describe(mapping.service_uid)  # ServiceUnavailable if gone
    if not container.has_type(mapping.type_id):
        descriptor, _ = generate_proxy_type(description,
                                            generated_at=mapping.generated_at)
        container.register_type(descriptor,
                                lambda: ProxyBehavior(bus, mapping))
    instance = container.instantiate(mapping.type_id, instance_id,
                                     initial_properties)
    behavior = container.behavior_of(instance_id)
    assert isinstance(behavior, ProxyBehavior)
    behavior.connect()
    return instance


def on_service_lost(container: Container, instance_id: str,
                    policy: DisappearancePolicy) -> str:
    """Apply a disappearance policy to a proxy whose service is gone.

    Returns "frozen" or "removed". Removal cascades bindings and surfaces
    through the container's structural-change listeners.
    """
    behavior = container.behavior_of(instance_id)
    if not isinstance(behavior, ProxyBehavior):
        raise UnknownInstanceId(f"{instance_id} is not a proxy instance")
    if policy.mode == FREEZE:
        behavior.freeze(policy)
        return "frozen"
    container.destroy(instance_id)
    return "removed"


def rebind_compatible(container: Container, instance_id: str,
                      candidate: ServiceDescription) -> bool:
    """Try to point a frozen proxy at a replacement service."""
    behavior = container.behavior_of(instance_id)
    if not isinstance(behavior, ProxyBehavior):
        raise UnknownInstanceId(f"{instance_id} is not a proxy instance")
    return behavior.rebind(candidate)


class ProxySupervisor:
    """Keeps proxies in step with the bus: loss policies and rebinding.

    Optionally auto-instantiates a proxy for every service matching a
    filter, which is how an assembly tracks a class of devices.
    """

    def __init__(self, container: Container, bus: BusNode):
        self.container = container
        self.bus = bus
        self._tracked: Dict[str, Tuple[str, DisappearancePolicy]] = {}
        self._auto_rules: List[dict] = []
        self._lock = threading.RLock()
        self._watch = bus.watch("*", self._on_found, self._on_lost)

    def instantiate(self, service_uid: str, instance_id: str,
                    policy: DisappearancePolicy,
                    initial_properties: Optional[dict] = None):
        description = self.bus.describe(service_uid)
        _, mapping = generate_proxy_type(description,
                                         generated_at=self.bus.clock.now())
        instance = instantiate_proxy(self.container, self.bus, mapping,
                                     instance_id, initial_properties)
        with self._lock:
            self._tracked[service_uid] = (instance_id, policy)
        return instance

    def auto_instantiate(self, filter_expr: str, policy: DisappearancePolicy,
                         instance_id_fn: Optional[Callable[[str], str]] = None,
                         on_created: Optional[Callable[[str, str], None]] = None) -> None:
        rule = {"filter": filter_expr, "policy": policy,
                "id_fn": instance_id_fn or (lambda uid: f"proxy-{uid}"),
                "on_created": on_created}
        with self._lock:
            self._auto_rules.append(rule)
        for sighting in self.bus.known_sightings(filter_expr):
            self._apply_rule(rule, sighting)

    def tracked_instance(self, service_uid: str) -> Optional[str]:
        with self._lock:
            entry = self._tracked.get(service_uid)
            return entry[0] if entry else None

    def close(self) -> None:
        self._watch.cancel()

    # -- watch callbacks --

    def _on_found(self, sighting: ServiceSighting) -> None:
        self._try_rebind(sighting)
        with self._lock:
            rules = [r for r in self._auto_rules
                     if kind_matches(r["filter"], sighting.service_kinds)]
        for rule in rules:
            self._apply_rule(rule, sighting)

    def _apply_rule(self, rule: dict, sighting: ServiceSighting) -> None:
        with self._lock:
            if sighting.service_uid in self._tracked:
                return
            instance_id = rule["id_fn"](sighting.service_uid)
            self._tracked[sighting.service_uid] = (instance_id, rule["policy"])
        try:
            description = self.bus.describe(sighting.service_uid)
            _, mapping = generate_proxy_type(description,
                                             generated_at=self.bus.clock.now())
            instantiate_proxy(self.container, self.bus, mapping, instance_id)
        except SlcaError:
            with self._lock:
                self._tracked.pop(sighting.service_uid, None)
            return
        if rule["on_created"]:
            rule["on_created"](sighting.service_uid, instance_id)

    def _try_rebind(self, sighting: ServiceSighting) -> None:
        with self._lock:
            frozen = [(uid, iid, pol) for uid, (iid, pol) in self._tracked.items()
                      if pol.mode == FREEZE]
        for old_uid, instance_id, policy in frozen:
            if not self.container.has_instance(instance_id):
                continue
            behavior = self.container.behavior_of(instance_id)
            if not isinstance(behavior, ProxyBehavior) or not behavior.frozen:
                continue
            if not kind_matches(policy.compatibility_filter,
                                sighting.service_kinds):
                continue
            try:
                candidate = self.bus.describe(sighting.service_uid)
            except ServiceUnavailable:
                continue
            if behavior.rebind(candidate):
                with self._lock:
                    self._tracked.pop(old_uid, None)
                    self._tracked[candidate.service_uid] = (instance_id, policy)

    def _on_lost(self, service_uid: str) -> None:
        with self._lock:
            entry = self._tracked.get(service_uid)
        if entry is None:
            return
        instance_id, policy = entry
        if not self.container.has_instance(instance_id):
            with self._lock:
                self._tracked.pop(service_uid, None)
            return
        resolution = on_service_lost(self.container, instance_id, policy)
        if resolution == "removed":
            with self._lock:
                self._tracked.pop(service_uid, None)
