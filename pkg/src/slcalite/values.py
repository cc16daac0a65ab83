"""Value kinds shared by ports, properties, method signatures and the wire.

Five kinds exist: bool, int, float, string, blob. Payloads are tuples of
these scalars and are immutable once emitted, so fan-out can never observe
aliasing effects.
"""

from __future__ import annotations

import base64
from enum import Enum
from typing import Any, Sequence, Tuple


class ValueKind(str, Enum):
    BOOL = "bool"
    INT = "int"
    FLOAT = "float"
    STRING = "string"
    BLOB = "blob"

    def __str__(self) -> str:  # wire-friendly
        return self.value


_DEFAULTS = {
    ValueKind.BOOL: False,
    ValueKind.INT: 0,
    ValueKind.FLOAT: 0.0,
    ValueKind.STRING: "",
    ValueKind.BLOB: b"",
}


def kind_of(name: str) -> ValueKind:
    try:
        return ValueKind(name)
    except ValueError:
        raise ValueError(f"unknown value kind {name!r}") from None


def default_for(kind: ValueKind) -> Any:
    return _DEFAULTS[kind]


def conforms(value: Any, kind: ValueKind) -> bool:
    """Strict kind check. bool is not an int; int is accepted for float."""
    if kind is ValueKind.BOOL:
        return isinstance(value, bool)
    if kind is ValueKind.INT:
        return isinstance(value, int) and not isinstance(value, bool)
    if kind is ValueKind.FLOAT:
        return (isinstance(value, float)
                or (isinstance(value, int) and not isinstance(value, bool)))
    if kind is ValueKind.STRING:
        return isinstance(value, str)
    if kind is ValueKind.BLOB:
        return isinstance(value, bytes)
    return False


def coerce(value: Any, kind: ValueKind) -> Any:
    """Return value normalized to its kind, or raise ValueError."""
    if not conforms(value, kind):
        raise ValueError(f"value {value!r} does not conform to kind {kind}")
    if kind is ValueKind.FLOAT:
        return float(value)
    return value


def freeze_payload(values: Sequence[Any], kinds: Sequence[ValueKind]) -> Tuple[Any, ...]:
    """Validate values against kinds and return an immutable payload tuple."""
    values = tuple(values)
    if len(values) != len(kinds):
        raise ValueError(f"expected {len(kinds)} values, got {len(values)}")
    return tuple(coerce(v, k) for v, k in zip(values, kinds))


# --- wire encoding ----------------------------------------------------------
# JSON covers bool/int/float/string natively; blobs travel base64-wrapped in
# a single-key object so any implementation of the protocol can round-trip.

def encode_value(value: Any) -> Any:
    if isinstance(value, bytes):
        return {"$blob": base64.b64encode(value).decode("ascii")}
    return value


def decode_value(value: Any) -> Any:
    if isinstance(value, dict) and set(value.keys()) == {"$blob"}:
        return base64.b64decode(value["$blob"])
    return value


def encode_values(values: Sequence[Any]) -> list:
    return [encode_value(v) for v in values]


def decode_values(values: Sequence[Any]) -> list:
    return [decode_value(v) for v in values]
