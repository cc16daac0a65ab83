"""Ready-made basic component types for assemblies built from the console.

These are ordinary user-level components: the container itself provides
no built-in behavior beyond sequence forwarding, so even utilities like
thresholds and relays live in the loadable type library.
"""

from __future__ import annotations

from .composite import TypeLibrary
from .kernel import (
    ComponentBehavior, ComponentTypeDescriptor, PortSpec, PropertySpec,
    make_sequence_descriptor,
)
from .values import ValueKind


class ThresholdBehavior(ComponentBehavior):
    """Emits True when the input crosses above the limit property."""

    def on_input(self, ctx, port_id, payload):
        ctx.emit("out", (payload[0] > ctx.get_property("limit"),))


class RecorderBehavior(ComponentBehavior):
    """Appends every delivery to user_state['seen']; handy sink for tests."""

    def on_input(self, ctx, port_id, payload):
        ctx.user_state.setdefault("seen", []).append(
            payload[0] if len(payload) == 1 else tuple(payload))


class ConstIntBehavior(ComponentBehavior):
    """Parameterless trigger in, configured constant out."""

    def on_input(self, ctx, port_id, payload):
        ctx.emit("out", (ctx.get_property("value"),))


class CounterBehavior(ComponentBehavior):
    """Counts parameterless triggers and emits the running count."""

    def on_input(self, ctx, port_id, payload):
        count = ctx.user_state.get("count", 0) + 1
        ctx.user_state["count"] = count
        ctx.emit("out", (count,))


def _relay(kind: ValueKind) -> ComponentTypeDescriptor:
    return ComponentTypeDescriptor(
        f"relay_{kind}",
        inputs=(PortSpec.input("in", kind),),
        outputs=(PortSpec.output("out", kind),),
    )


class RelayBehavior(ComponentBehavior):
    def on_input(self, ctx, port_id, payload):
        ctx.emit("out", payload)


def standard_library() -> TypeLibrary:
    library = TypeLibrary()
    library.register(
        ComponentTypeDescriptor(
            "threshold",
            inputs=(PortSpec.input("in", ValueKind.FLOAT),),
            outputs=(PortSpec.output("out", ValueKind.BOOL),),
            properties=(PropertySpec("limit", ValueKind.FLOAT, 0.5),),
        ),
        ThresholdBehavior,
    )
    for kind in (ValueKind.BOOL, ValueKind.INT, ValueKind.FLOAT, ValueKind.STRING):
        library.register(_relay(kind), RelayBehavior)
        library.register(
            ComponentTypeDescriptor(
                f"recorder_{kind}",
                inputs=(PortSpec.input("in", kind),),
            ),
            RecorderBehavior,
        )
    library.register(
        ComponentTypeDescriptor(
            "recorder_any",
            inputs=(PortSpec.input("in"),),
        ),
        RecorderBehavior,
    )
    library.register(
        ComponentTypeDescriptor(
            "const_int",
            inputs=(PortSpec.input("in"),),
            outputs=(PortSpec.output("out", ValueKind.INT),),
            properties=(PropertySpec("value", ValueKind.INT, 0),),
        ),
        ConstIntBehavior,
    )
    library.register(
        ComponentTypeDescriptor(
            "counter",
            inputs=(PortSpec.input("in"),),
            outputs=(PortSpec.output("out", ValueKind.INT),),
        ),
        CounterBehavior,
    )
    library.register(make_sequence_descriptor("seq2", ()))
    library.register(make_sequence_descriptor("seq3", (), fanout=3))
    library.register(make_sequence_descriptor("seq2_int", (ValueKind.INT,)))
    library.register(make_sequence_descriptor("seq2_bool", (ValueKind.BOOL,)))
    return library
