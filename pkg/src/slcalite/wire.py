"""Wire documents for the "slca-lite/1" protocol.

Three traffic classes share one canonical encoding (UTF-8 JSON, sorted
keys, no whitespace, one document per datagram/exchange):

  * discovery  - ALIVE / BYEBYE / SEARCH / RESPONSE datagrams
  * invocation - request/response exchanges against a service endpoint
  * eventing   - subscription management and event pushes

The grammar and field tables live in docs/protocol.md; the byte-exact
fixtures under tests/golden/ are produced with `encode`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from .values import ValueKind, kind_of

PROTOCOL_VERSION = "slca-lite/1"


def encode(doc: dict) -> bytes:
    """Canonical byte encoding of a wire document."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def decode(data: bytes) -> dict:
    doc = json.loads(data.decode("utf-8"))
    if not isinstance(doc, dict):
        raise ValueError("wire document must be a JSON object")
    if doc.get("version") != PROTOCOL_VERSION:
        raise ValueError(f"unsupported protocol version {doc.get('version')!r}")
    return doc


def stamp(doc: dict) -> dict:
    doc["version"] = PROTOCOL_VERSION
    return doc


# --- discovery ---------------------------------------------------------------

class MessageKind(str, Enum):
    ALIVE = "ALIVE"
    BYEBYE = "BYEBYE"
    SEARCH = "SEARCH"
    RESPONSE = "RESPONSE"


@dataclass(frozen=True)
class DiscoveryMessage:
    kind: MessageKind
    seq: int
    service_uid: str = ""
    service_kinds: Tuple[str, ...] = ()
    endpoint: str = ""
    lease_seconds: Optional[int] = None
    search_filter: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "service_kinds", tuple(self.service_kinds))
        if self.kind in (MessageKind.ALIVE, MessageKind.RESPONSE):
            if self.lease_seconds is None or self.lease_seconds < 1:
                raise ValueError(f"{self.kind.value} must carry lease_seconds >= 1")
        if self.kind is MessageKind.BYEBYE and self.lease_seconds is not None:
            raise ValueError("BYEBYE carries no lease")
        if self.kind is MessageKind.SEARCH and not self.search_filter:
            raise ValueError("SEARCH must carry a search_filter")

    def to_doc(self) -> dict:
        doc: Dict[str, Any] = {"kind": self.kind.value, "seq": self.seq}
        if self.service_uid:
            doc["service_uid"] = self.service_uid
        if self.service_kinds:
            doc["service_kinds"] = list(self.service_kinds)
        if self.endpoint:
            doc["endpoint"] = self.endpoint
        if self.lease_seconds is not None:
            doc["lease_seconds"] = self.lease_seconds
        if self.search_filter is not None:
            doc["search_filter"] = self.search_filter
        return stamp(doc)

    @staticmethod
    def from_doc(doc: dict) -> "DiscoveryMessage":
        return DiscoveryMessage(
            kind=MessageKind(doc["kind"]),
            seq=doc["seq"],
            service_uid=doc.get("service_uid", ""),
            service_kinds=tuple(doc.get("service_kinds", ())),
            endpoint=doc.get("endpoint", ""),
            lease_seconds=doc.get("lease_seconds"),
            search_filter=doc.get("search_filter"),
        )


def kind_matches(filter_expr: str, kinds: Tuple[str, ...]) -> bool:
    """Kind-URI filter: '*' matches anything, 'prefix:*' is a prefix match."""
    if filter_expr == "*":
        return True
    if filter_expr.endswith("*"):
        prefix = filter_expr[:-1]
        return any(k.startswith(prefix) for k in kinds)
    return filter_expr in kinds


# --- service descriptions ------------------------------------------------------

@dataclass(frozen=True)
class MethodSpec:
    name: str
    params: Tuple[Tuple[str, ValueKind], ...] = ()
    returns: Tuple[ValueKind, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple((n, k) for n, k in self.params))
        object.__setattr__(self, "returns", tuple(self.returns))

    @property
    def param_kinds(self) -> Tuple[ValueKind, ...]:
        return tuple(k for _, k in self.params)


@dataclass(frozen=True)
class ServiceDescription:
    """Discoverable contract of a service: identity, methods, events."""

    service_uid: str
    friendly_name: str = ""
    service_kinds: Tuple[str, ...] = ()
    endpoint: str = ""
    methods: Tuple[MethodSpec, ...] = ()
    evented_variables: Tuple[Tuple[str, ValueKind], ...] = ()
    composite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "service_kinds", tuple(self.service_kinds))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "evented_variables",
                           tuple((n, k) for n, k in self.evented_variables))
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.service_uid}: duplicate method names")
        var_names = [n for n, _ in self.evented_variables]
        if len(set(var_names)) != len(var_names):
            raise ValueError(f"{self.service_uid}: duplicate evented variable names")

    def method(self, name: str) -> Optional[MethodSpec]:
        for m in self.methods:
            if m.name == name:
                return m
        return None

    def variable_kind(self, name: str) -> Optional[ValueKind]:
        for n, k in self.evented_variables:
            if n == name:
                return k
        return None

    def with_endpoint(self, endpoint: str) -> "ServiceDescription":
        return ServiceDescription(
            self.service_uid, self.friendly_name, self.service_kinds, endpoint,
            self.methods, self.evented_variables, self.composite)

    def to_doc(self) -> dict:
        return {
            "service_uid": self.service_uid,
            "friendly_name": self.friendly_name,
            "service_kinds": list(self.service_kinds),
            "endpoint": self.endpoint,
            "methods": [
                {
                    "name": m.name,
                    "params": [{"name": n, "kind": str(k)} for n, k in m.params],
                    "returns": [str(k) for k in m.returns],
                }
                for m in self.methods
            ],
            "evented_variables": [
                {"name": n, "kind": str(k)} for n, k in self.evented_variables
            ],
            "composite": self.composite,
        }

    @staticmethod
    def from_doc(doc: dict) -> "ServiceDescription":
        return ServiceDescription(
            service_uid=doc["service_uid"],
            friendly_name=doc.get("friendly_name", ""),
            service_kinds=tuple(doc.get("service_kinds", ())),
            endpoint=doc.get("endpoint", ""),
            methods=tuple(
                MethodSpec(
                    m["name"],
                    tuple((p["name"], kind_of(p["kind"])) for p in m["params"]),
                    tuple(kind_of(k) for k in m["returns"]),
                )
                for m in doc.get("methods", ())
            ),
            evented_variables=tuple(
                (v["name"], kind_of(v["kind"]))
                for v in doc.get("evented_variables", ())
            ),
            composite=doc.get("composite", False),
        )
