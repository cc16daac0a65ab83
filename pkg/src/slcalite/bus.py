"""Decentralized service bus: discovery, remote invocation, eventing.

There is no registry. A node announces each hosted service with ALIVE
datagrams carrying a lease, refreshes the announcement at half-lease, and
withdraws with a single BYEBYE. Peers keep a lease-bounded cache; an entry
that is not refreshed disappears at its deadline exactly as if the service
had said goodbye. SEARCH datagrams are answered by every node hosting a
matching live service with a unicast RESPONSE.

ALIVE datagrams carry identity, kinds and endpoint only; the full
description document is fetched from the endpoint on demand.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from . import wire
from .clock import Clock, TimerHandle
from .config import NodeConfig
from .errors import (
    ArgumentError, DuplicateServiceUid, MethodNotFound, RemoteFault,
    ServiceUnavailable, SlcaError, UnknownServiceUid, UnknownSubscription,
    UnknownVariable, fault_name, raise_fault,
)
from .transport import LoopbackHub, ReplyContext, TransportBinding, UdpTcpBinding
from .values import ValueKind, conforms, decode_value, decode_values, encode_value, encode_values
from .wire import (
    DiscoveryMessage, MessageKind, MethodSpec, ServiceDescription, kind_matches, stamp,
)


class ServiceHandler:
    """Host-side behavior of a service: method calls and variable reads."""

    def call(self, method: str, args: Sequence[Any]) -> Any:
        raise MethodNotFound(method)

    def read_variable(self, name: str) -> Any:
        raise UnknownVariable(name)


@dataclass
class CallResult:
    """Return values plus optional extras a handler wants on the wire."""
    returns: List[Any]
    trace_id: Optional[str] = None


@dataclass(frozen=True)
class ServiceSighting:
    """What discovery alone knows about a service (before a describe)."""
    service_uid: str
    service_kinds: Tuple[str, ...]
    endpoint: str


@dataclass
class Subscription:
    subscription_id: str
    service_uid: str
    variable: str
    callback_endpoint: str
    expires_at: float


@dataclass
class _Hosted:
    description: ServiceDescription
    handler: Optional[ServiceHandler]
    lease_seconds: int
    timer: Optional[TimerHandle] = None


@dataclass
class _CacheEntry:
    sighting: ServiceSighting
    expires_at: float
    last_seq: int
    description: Optional[ServiceDescription] = None


@dataclass
class _Watch:
    filter: str
    on_found: Callable[[ServiceSighting], None]
    on_lost: Callable[[str], None]
    found: set = field(default_factory=set)
    active: bool = True


class WatchHandle:
    def __init__(self, node: "BusNode", watch: _Watch):
        self._node = node
        self._watch = watch

    def cancel(self) -> None:
        self._watch.active = False
        with self._node._lock:
            if self._watch in self._node._watches:
                self._node._watches.remove(self._watch)


@dataclass
class _InboundSub:
    subscription_id: str
    service_uid: str
    variable: str
    callback_endpoint: str
    expires_at: float
    seq: int = 0


@dataclass
class _OutboundSub:
    subscription: Subscription
    callback: Callable[[str, Any, int], None]
    lock: threading.Lock = field(default_factory=threading.Lock)


class BusNode:
    """One participant on the bus. Hosts services and consumes others."""

    def __init__(self, name: str, clock: Clock,
                 hub: Optional[LoopbackHub] = None,
                 config: Optional[NodeConfig] = None):
        self.name = name
        self.clock = clock
        self.config = config or NodeConfig(node_name=name)
        self._lock = threading.RLock()
        self._seq = itertools.count(1)
        self._sub_seq = itertools.count(1)
        self._hosted: Dict[str, _Hosted] = {}
        self._cache: Dict[str, _CacheEntry] = {}
        self._watches: List[_Watch] = []
        self._inbound: Dict[str, _InboundSub] = {}
        self._outbound: Dict[str, _OutboundSub] = {}
        self._searches: List[dict] = []
        self._closed = False
        if hub is not None:
            self._binding: TransportBinding = hub.attach(
                name, self._on_discovery, self._on_request)
        else:
            self._binding = UdpTcpBinding(name, self.config,
                                          self._on_discovery, self._on_request)

    @property
    def endpoint(self) -> str:
        return self._binding.endpoint

    # --- advertising ----------------------------------------------------------

    def advertise(self, description: ServiceDescription,
                  handler: Optional[ServiceHandler] = None,
                  lease_seconds: Optional[int] = None) -> None:
        if (description.methods or description.evented_variables) and handler is None:
            raise ValueError(
                f"{description.service_uid}: a handler is required to make "
                "the advertised methods and variables reachable")
        lease = lease_seconds or self.config.default_lease_seconds
        with self._lock:
            if description.service_uid in self._hosted:
                raise DuplicateServiceUid(description.service_uid)
            description = description.with_endpoint(self.endpoint)
            hosted = _Hosted(description, handler, lease)
            self._hosted[description.service_uid] = hosted
        self._send_alive(description, lease)
        self._schedule_reannounce(description.service_uid, lease)

    def withdraw(self, service_uid: str) -> None:
        with self._lock:
            hosted = self._hosted.pop(service_uid, None)
            if hosted is None:
                raise UnknownServiceUid(service_uid)
            if hosted.timer is not None:
                hosted.timer.cancel()
            # inbound subscriptions die with the service
            for sub_id in [s for s, sub in self._inbound.items()
                           if sub.service_uid == service_uid]:
                del self._inbound[sub_id]
        self._send_discovery(DiscoveryMessage(
            MessageKind.BYEBYE, next(self._seq),
            service_uid=service_uid,
            service_kinds=hosted.description.service_kinds))

    def hosted_description(self, service_uid: str) -> Optional[ServiceDescription]:
        with self._lock:
            hosted = self._hosted.get(service_uid)
            return hosted.description if hosted else None

    def _send_alive(self, description: ServiceDescription, lease: int) -> None:
        self._send_discovery(DiscoveryMessage(
            MessageKind.ALIVE, next(self._seq),
            service_uid=description.service_uid,
            service_kinds=description.service_kinds,
            endpoint=self.endpoint,
            lease_seconds=lease))

    def _schedule_reannounce(self, service_uid: str, lease: int) -> None:
        delay = lease * self.config.reannounce_factor

        def reannounce():
            with self._lock:
                hosted = self._hosted.get(service_uid)
            if hosted is None or self._closed:
                return
            self._send_alive(hosted.description, hosted.lease_seconds)
            self._schedule_reannounce(service_uid, hosted.lease_seconds)

        with self._lock:
            hosted = self._hosted.get(service_uid)
            if hosted is not None:
                hosted.timer = self.clock.schedule(delay, reannounce)

    def _send_discovery(self, message: DiscoveryMessage) -> None:
        self._binding.send_discovery(message.to_doc())

    # --- discovery consumption --------------------------------------------------

    def search(self, filter_expr: str = "*") -> List[ServiceDescription]:
        collector = {"filter": filter_expr, "uids": set(), "sightings": []}
        with self._lock:
            self._searches.append(collector)
        try:
            self._send_discovery(DiscoveryMessage(
                MessageKind.SEARCH, next(self._seq), search_filter=filter_expr))
            if not self.endpoint.startswith("loop://"):
                # real transport: responses trickle in over the collect window
                self.clock.sleep(self.config.search_window_seconds)
        finally:
            with self._lock:
                self._searches.remove(collector)
        results = []
        for sighting in collector["sightings"]:
            try:
                results.append(self.describe(sighting.service_uid))
            except ServiceUnavailable:
                continue
        return results

    def watch(self, filter_expr: str,
              on_found: Callable[[ServiceSighting], None],
              on_lost: Callable[[str], None]) -> WatchHandle:
        watch = _Watch(filter_expr, on_found, on_lost)
        pending = []
        with self._lock:
            self._watches.append(watch)
            for entry in self._cache.values():
                if entry.expires_at > self.clock.now() and \
                        kind_matches(filter_expr, entry.sighting.service_kinds):
                    watch.found.add(entry.sighting.service_uid)
                    pending.append(entry.sighting)
        for sighting in pending:
            on_found(sighting)
        return WatchHandle(self, watch)

    def known_sightings(self, filter_expr: str = "*") -> List[ServiceSighting]:
        with self._lock:
            now = self.clock.now()
            return [e.sighting for e in self._cache.values()
                    if e.expires_at > now
                    and kind_matches(filter_expr, e.sighting.service_kinds)]

    def describe(self, service_uid: str) -> ServiceDescription:
        with self._lock:
            hosted = self._hosted.get(service_uid)
            if hosted is not None:
                return hosted.description
            entry = self._cache.get(service_uid)
            if entry is not None and entry.description is not None:
                return entry.description
            endpoint = entry.sighting.endpoint if entry else None
        if endpoint is None:
            raise ServiceUnavailable(f"{service_uid} is not in the discovery cache")
        response = self._request(endpoint, stamp(
            {"type": "describe", "service_uid": service_uid}))
        _check_fault(response)
        description = ServiceDescription.from_doc(response["description"])
        with self._lock:
            entry = self._cache.get(service_uid)
            if entry is not None:
                entry.description = description
        return description

    def _on_discovery(self, doc: dict, ctx: ReplyContext) -> None:
        try:
            message = DiscoveryMessage.from_doc(doc)
        except (KeyError, ValueError):
            return
        if message.kind is MessageKind.SEARCH:
            self._answer_search(message, ctx)
            return
        if message.kind in (MessageKind.ALIVE, MessageKind.RESPONSE):
            self._note_alive(message)
        elif message.kind is MessageKind.BYEBYE:
            self._note_byebye(message)

    def _answer_search(self, message: DiscoveryMessage, ctx: ReplyContext) -> None:
        with self._lock:
            matching = [
                (hosted.description, hosted.lease_seconds)
                for hosted in self._hosted.values()
                if kind_matches(message.search_filter or "*",
                                hosted.description.service_kinds)
            ]
        for description, lease in matching:
            ctx.reply(DiscoveryMessage(
                MessageKind.RESPONSE, next(self._seq),
                service_uid=description.service_uid,
                service_kinds=description.service_kinds,
                endpoint=self.endpoint,
                lease_seconds=lease).to_doc())

    def _note_alive(self, message: DiscoveryMessage) -> None:
        uid = message.service_uid
        sighting = ServiceSighting(uid, message.service_kinds, message.endpoint)
        found_watches = []
        with self._lock:
            entry = self._cache.get(uid)
            if entry is not None and message.seq <= entry.last_seq:
                return  # stale or duplicate announcement
            expiry = self.clock.now() + (message.lease_seconds or 1)
            if entry is None:
                entry = _CacheEntry(sighting, expiry, message.seq)
                self._cache[uid] = entry
            else:
                refresh = entry.sighting.endpoint == sighting.endpoint
                entry.sighting = sighting
                entry.expires_at = expiry
                entry.last_seq = message.seq
                if not refresh:
                    entry.description = None
            for watch in self._watches:
                if watch.active and uid not in watch.found and \
                        kind_matches(watch.filter, sighting.service_kinds):
                    watch.found.add(uid)
                    found_watches.append(watch)
            for collector in self._searches:
                if uid not in collector["uids"] and \
                        kind_matches(collector["filter"], sighting.service_kinds):
                    collector["uids"].add(uid)
                    collector["sightings"].append(sighting)
        self._schedule_expiry(uid, message.lease_seconds or 1)
        for watch in found_watches:
            watch.on_found(sighting)

    def _schedule_expiry(self, uid: str, lease: int) -> None:
        def expire():
            lost_watches = []
            with self._lock:
                entry = self._cache.get(uid)
                if entry is None or entry.expires_at > self.clock.now():
                    return  # refreshed since this timer was set
                del self._cache[uid]
                lost_watches = self._mark_lost(uid)
            for watch in lost_watches:
                watch.on_lost(uid)

        self.clock.schedule(lease, expire)

    def _note_byebye(self, message: DiscoveryMessage) -> None:
        uid = message.service_uid
        with self._lock:
            entry = self._cache.get(uid)
            if entry is None or message.seq <= entry.last_seq:
                return
            del self._cache[uid]
            lost_watches = self._mark_lost(uid)
        for watch in lost_watches:
            watch.on_lost(uid)

    def _mark_lost(self, uid: str) -> List[_Watch]:
        lost = []
        for watch in self._watches:
            if watch.active and uid in watch.found:
                watch.found.discard(uid)
                lost.append(watch)
        return lost

    # --- invocation ----------------------------------------------------------

    def invoke(self, service_uid: str, method: str,
               args: Sequence[Any] = ()) -> List[Any]:
        description = self.describe(service_uid)
        spec = description.method(method)
        if spec is None:
            raise MethodNotFound(f"{service_uid} has no method {method!r}")
        args = list(args)
        if len(args) != len(spec.params):
            raise ArgumentError(
                f"{method} takes {len(spec.params)} argument(s), got {len(args)}")
        for (pname, kind), value in zip(spec.params, args):
            if not conforms(value, kind):
                raise ArgumentError(f"{method}: {pname} must be {kind}, got {value!r}")
        response = self._request(description.endpoint, stamp({
            "type": "invoke",
            "service_uid": service_uid,
            "method": method,
            "args": encode_values(args),
        }))
        _check_fault(response)
        return decode_values(response.get("returns", []))

    def _request(self, endpoint: str, doc: dict) -> dict:
        return self._binding.request(endpoint, doc)

    # --- eventing --------------------------------------------------------------

    def subscribe(self, service_uid: str, variable: str,
                  callback: Callable[[str, Any, int], None],
                  lease_seconds: Optional[int] = None) -> Subscription:
        description = self.describe(service_uid)
        if description.variable_kind(variable) is None:
            raise UnknownVariable(f"{service_uid} has no evented variable {variable!r}")
        lease = lease_seconds or self.config.default_lease_seconds
        response = self._request(description.endpoint, stamp({
            "type": "subscribe",
            "service_uid": service_uid,
            "variable": variable,
            "callback": self.endpoint,
            "lease_seconds": lease,
        }))
        _check_fault(response)
        sub = Subscription(
            subscription_id=response["subscription_id"],
            service_uid=service_uid,
            variable=variable,
            callback_endpoint=self.endpoint,
            expires_at=self.clock.now() + response["lease_seconds"],
        )
        outbound = _OutboundSub(sub, callback)
        with self._lock:
            self._outbound[sub.subscription_id] = outbound
        self._schedule_outbound_expiry(sub.subscription_id)
        # current state arrives with the subscription; deliver it as event 0
        with outbound.lock:
            callback(variable, decode_value(response["initial_value"]), 0)
        return sub

    def renew(self, subscription_id: str,
              lease_seconds: Optional[int] = None) -> None:
        with self._lock:
            outbound = self._outbound.get(subscription_id)
        if outbound is None:
            raise UnknownSubscription(subscription_id)
        if outbound.subscription.expires_at <= self.clock.now():
            with self._lock:
                self._outbound.pop(subscription_id, None)
            raise UnknownSubscription(f"{subscription_id} already expired")
        lease = lease_seconds or self.config.default_lease_seconds
        description = self.describe(outbound.subscription.service_uid)
        response = self._request(description.endpoint, stamp({
            "type": "renew",
            "subscription_id": subscription_id,
            "lease_seconds": lease,
        }))
        _check_fault(response)
        outbound.subscription.expires_at = self.clock.now() + response["lease_seconds"]
        self._schedule_outbound_expiry(subscription_id)

    def unsubscribe(self, subscription_id: str) -> None:
        with self._lock:
            outbound = self._outbound.pop(subscription_id, None)
        if outbound is None:
            raise UnknownSubscription(subscription_id)
        description = self.describe(outbound.subscription.service_uid)
        try:
            response = self._request(description.endpoint, stamp({
                "type": "unsubscribe",
                "subscription_id": subscription_id,
            }))
            _check_fault(response)
        except ServiceUnavailable:
            pass  # service already gone; local routing is dropped regardless

    def _schedule_outbound_expiry(self, subscription_id: str) -> None:
        def expire():
            with self._lock:
                outbound = self._outbound.get(subscription_id)
                if outbound is None or \
                        outbound.subscription.expires_at > self.clock.now():
                    return
                del self._outbound[subscription_id]

        with self._lock:
            outbound = self._outbound.get(subscription_id)
        if outbound is not None:
            delay = outbound.subscription.expires_at - self.clock.now()
            self.clock.schedule(max(delay, 0.0), expire)

    def publish(self, service_uid: str, variable: str, value: Any) -> int:
        """Push a variable change to live subscribers. Returns delivery count."""
        with self._lock:
            if service_uid not in self._hosted:
                raise UnknownServiceUid(service_uid)
            now = self.clock.now()
            live = [sub for sub in self._inbound.values()
                    if sub.service_uid == service_uid and sub.variable == variable
                    and sub.expires_at > now]
            for sub in live:
                sub.seq += 1
            pushes = [(sub.subscription_id, sub.callback_endpoint, sub.seq)
                      for sub in live]
        delivered = 0
        for sub_id, endpoint, seq in pushes:
            try:
                response = self._request(endpoint, stamp({
                    "type": "event",
                    "subscription_id": sub_id,
                    "variable": variable,
                    "value": encode_value(value),
                    "seq": seq,
                }))
                _check_fault(response)
                delivered += 1
            except SlcaError:
                with self._lock:
                    self._inbound.pop(sub_id, None)
        return delivered

    def subscriber_count(self, service_uid: str) -> int:
        with self._lock:
            now = self.clock.now()
            return sum(1 for sub in self._inbound.values()
                       if sub.service_uid == service_uid and sub.expires_at > now)

    # --- request server ------------------------------------------------------------

    def _on_request(self, doc: dict) -> dict:
        try:
            return self._serve(doc)
        except SlcaError as exc:
            return stamp({"type": "result", "status": "fault",
                          "fault": {"name": fault_name(exc), "detail": str(exc)}})
        except Exception as exc:  # handler bug: marshal, don't kill the server
            return stamp({"type": "result", "status": "fault",
                          "fault": {"name": "RemoteFault", "detail": str(exc)}})

    def _serve(self, doc: dict) -> dict:
        rtype = doc.get("type")
        if rtype == "describe":
            hosted = self._hosted.get(doc["service_uid"])
            if hosted is None:
                raise ServiceUnavailable(doc["service_uid"])
            return stamp({"type": "result", "status": "ok",
                          "description": hosted.description.to_doc()})
        if rtype == "invoke":
            return self._serve_invoke(doc)
        if rtype == "subscribe":
            return self._serve_subscribe(doc)
        if rtype == "renew":
            return self._serve_renew(doc)
        if rtype == "unsubscribe":
            with self._lock:
                if self._inbound.pop(doc["subscription_id"], None) is None:
                    raise UnknownSubscription(doc["subscription_id"])
            return stamp({"type": "result", "status": "ok"})
        if rtype == "event":
            self._serve_event(doc)
            return stamp({"type": "result", "status": "ok"})
        raise RemoteFault("BadRequest", f"unknown request type {rtype!r}")

    def _serve_invoke(self, doc: dict) -> dict:
        with self._lock:
            hosted = self._hosted.get(doc["service_uid"])
        if hosted is None:
            raise ServiceUnavailable(doc["service_uid"])
        spec = hosted.description.method(doc["method"])
        if spec is None:
            raise MethodNotFound(doc["method"])
        args = decode_values(doc.get("args", []))
        if len(args) != len(spec.params):
            raise ArgumentError(
                f"{doc['method']} takes {len(spec.params)} argument(s), got {len(args)}")
        for (pname, kind), value in zip(spec.params, args):
            if not conforms(value, kind):
                raise ArgumentError(f"{doc['method']}: {pname} must be {kind}")
        result = hosted.handler.call(doc["method"], args)
        if isinstance(result, CallResult):
            returns, trace_id = result.returns, result.trace_id
        else:
            returns, trace_id = list(result or []), None
        response = stamp({"type": "result", "status": "ok",
                          "returns": encode_values(returns)})
        if trace_id is not None:
            response["trace"] = trace_id
        return response

    def _serve_subscribe(self, doc: dict) -> dict:
        with self._lock:
            hosted = self._hosted.get(doc["service_uid"])
        if hosted is None:
            raise ServiceUnavailable(doc["service_uid"])
        variable = doc["variable"]
        if hosted.description.variable_kind(variable) is None:
            raise UnknownVariable(variable)
        lease = int(doc.get("lease_seconds") or self.config.default_lease_seconds)
        initial = hosted.handler.read_variable(variable)
        sub = _InboundSub(
            subscription_id=f"{self.name}:sub{next(self._sub_seq)}",
            service_uid=doc["service_uid"],
            variable=variable,
            callback_endpoint=doc["callback"],
            expires_at=self.clock.now() + lease,
        )
        with self._lock:
            self._inbound[sub.subscription_id] = sub
        self._schedule_inbound_expiry(sub.subscription_id)
        return stamp({"type": "result", "status": "ok",
                      "subscription_id": sub.subscription_id,
                      "lease_seconds": lease,
                      "initial_value": encode_value(initial)})

    def _serve_renew(self, doc: dict) -> dict:
        sub_id = doc["subscription_id"]
        lease = int(doc.get("lease_seconds") or self.config.default_lease_seconds)
        with self._lock:
            sub = self._inbound.get(sub_id)
            if sub is None or sub.expires_at <= self.clock.now():
                self._inbound.pop(sub_id, None)
                raise UnknownSubscription(sub_id)
            sub.expires_at = self.clock.now() + lease
        self._schedule_inbound_expiry(sub_id)
        return stamp({"type": "result", "status": "ok", "lease_seconds": lease})

    def _schedule_inbound_expiry(self, sub_id: str) -> None:
        def expire():
            with self._lock:
                sub = self._inbound.get(sub_id)
                if sub is not None and sub.expires_at <= self.clock.now():
                    del self._inbound[sub_id]

        with self._lock:
            sub = self._inbound.get(sub_id)
        if sub is not None:
            self.clock.schedule(max(sub.expires_at - self.clock.now(), 0.0), expire)

    def _serve_event(self, doc: dict) -> None:
        sub_id = doc["subscription_id"]
        with self._lock:
            outbound = self._outbound.get(sub_id)
            if outbound is not None and \
                    outbound.subscription.expires_at <= self.clock.now():
                del self._outbound[sub_id]
                outbound = None
        if outbound is None:
            raise UnknownSubscription(sub_id)
        with outbound.lock:  # FIFO per subscription
            outbound.callback(doc["variable"], decode_value(doc["value"]), doc["seq"])

    # --- lifecycle --------------------------------------------------------------

    def close(self, graceful: bool = True) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            uids = list(self._hosted.keys())
        if graceful:
            for uid in uids:
                try:
                    self.withdraw(uid)
                except UnknownServiceUid:
                    pass
        else:
            with self._lock:
                for hosted in self._hosted.values():
                    if hosted.timer is not None:
                        hosted.timer.cancel()
                self._hosted.clear()
        self._binding.close()


def _check_fault(response: dict) -> None:
    if response.get("status") == "fault":
        fault = response.get("fault", {})
        raise_fault(fault.get("name", "RemoteFault"), fault.get("detail", ""))
