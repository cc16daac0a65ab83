import pytest

from slcalite.bus import BusNode, ServiceHandler


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {name}: {outcome}")
from slcalite.clock import MockClock
from slcalite.kernel import (
    ComponentBehavior, ComponentTypeDescriptor, Container, PortSpec,
    PropertySpec,
)
from slcalite.transport import LoopbackHub
from slcalite.values import ValueKind
from slcalite.wire import MethodSpec, ServiceDescription


@pytest.fixture
def hub():
    return LoopbackHub()


@pytest.fixture
def clock():
    return MockClock()


@pytest.fixture
def make_node(hub, clock):
    nodes = []

    def factory(name):
        node = BusNode(name, clock, hub)
        nodes.append(node)
        return node

    yield factory
    for node in nodes:
        node.close(graceful=False)


class RelayBehavior(ComponentBehavior):
    """Re-emits every input on the 'out' port."""

    def on_input(self, ctx, port_id, payload):
        ctx.emit("out", payload)


class RecorderBehavior(ComponentBehavior):
    def on_input(self, ctx, port_id, payload):
        ctx.user_state.setdefault("seen", []).append(tuple(payload))


def relay_descriptor(type_id="relay", *kinds):
    kinds = kinds or (ValueKind.INT,)
    return ComponentTypeDescriptor(
        type_id,
        inputs=(PortSpec.input("in", *kinds),),
        outputs=(PortSpec.output("out", *kinds),),
    )


def recorder_descriptor(type_id="recorder", *kinds):
    kinds = kinds or (ValueKind.INT,)
    return ComponentTypeDescriptor(
        type_id, inputs=(PortSpec.input("in", *kinds),))


def emitter_descriptor(type_id="emitter", *kinds):
    kinds = kinds or (ValueKind.INT,)
    return ComponentTypeDescriptor(
        type_id, outputs=(PortSpec.output("out", *kinds),))


def seen(container: Container, instance_id: str):
    for inst in container.snapshot().instances:
        if inst.instance_id == instance_id:
            return inst.user_state.get("seen", [])
    raise AssertionError(f"no instance {instance_id}")


class EchoHandler(ServiceHandler):
    """Trivial service: Echo returns its argument, variable 'Value'."""

    def __init__(self, node=None, uid=""):
        self.node = node
        self.uid = uid
        self.value = 0

    def call(self, method, args):
        if method == "Echo":
            return [args[0]]
        if method == "SetValue":
            self.value = args[0]
            if self.node is not None:
                self.node.publish(self.uid, "Value", self.value)
            return []
        raise AssertionError(method)

    def read_variable(self, name):
        assert name == "Value"
        return self.value


def echo_description(uid, kinds=("slca:test:echo",)):
    return ServiceDescription(
        service_uid=uid,
        friendly_name=f"echo {uid}",
        service_kinds=kinds,
        methods=(
            MethodSpec("Echo", (("x", ValueKind.INT),), (ValueKind.INT,)),
            MethodSpec("SetValue", (("x", ValueKind.INT),)),
        ),
        evented_variables=(("Value", ValueKind.INT),),
    )
