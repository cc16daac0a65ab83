"""Acceptance suite: the structural laws the runtime must reproduce.

All criteria run on the loopback transport with the mock clock. Absolute
times from other hardware are never asserted; what is asserted are the
laws: linear instantiation cost, exact re-advertisement message counts,
the batching collapse, the proxy fixture shape, dispatch determinism,
lease-exact disappearance handling, hierarchical composition and remote
control round-trips.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion.
"""

import json
import time

from slcalite.bus import BusNode
from slcalite.clock import MockClock
from slcalite.components import standard_library
from slcalite.composite import Composite, ControlClient, compose_hierarchy
from slcalite.devsim import DeviceFleet, bench_component_creation, standard_light
from slcalite.kernel import (
    ComponentTypeDescriptor, Container, PortSpec, make_sequence_descriptor,
)
from slcalite.proxy import (
    DisappearancePolicy, ProxySupervisor, generate_proxy_type,
    instantiate_proxy,
)
from slcalite.transport import LoopbackHub
from slcalite.values import ValueKind

from conftest import RecorderBehavior, RelayBehavior, recorder_descriptor, seen


def fresh_net():
    return LoopbackHub(), MockClock()


def _creation_statistics():
    """Measure one benchmark pass and re-fit independently of the report."""
    report = bench_component_creation(n_max=1000)
    samples = report.get("creation").samples
    assert len(samples) == 1000
    cumulative, total = [], 0.0
    for s in samples:
        total += s
        cumulative.append(total)
    xs = range(1, 1001)
    sxy = sum(x * y for x, y in zip(xs, cumulative))
    sxx = sum(x * x for x in xs)
    slope = sxy / sxx
    mean_y = sum(cumulative) / 1000
    ss_res = sum((y - slope * x) ** 2 for x, y in zip(xs, cumulative))
    ss_tot = sum((y - mean_y) ** 2 for y in cumulative)
    r2 = 1 - ss_res / ss_tot
    first_decile = sum(samples[:100]) / 100
    last_decile = sum(samples[-100:]) / 100
    return r2, first_decile, last_decile


def test_criterion_1_instantiation_linearity():
    """Cumulative creation time fits c*n with R^2 >= 0.99; last decile
    mean <= 2x first decile; finishes inside 30 s.

    One instantiation costs microseconds, so a single scheduler
    preemption from a busy host can distort one measurement pass. The
    law itself is deterministic (a genuine size-dependent cost fails
    every pass), so up to three passes are allowed; thresholds are never
    loosened.
    """
    started = time.perf_counter()
    failures = []
    for attempt in range(3):
        r2, first_decile, last_decile = _creation_statistics()
        if r2 >= 0.99 and last_decile <= 2 * first_decile:
            break
        failures.append(f"attempt {attempt}: R^2={r2:.4f} "
                        f"first={first_decile:.3e}s last={last_decile:.3e}s")
    else:
        raise AssertionError(
            "cumulative creation time not linear / cost grew with assembly "
            "size in all attempts: " + "; ".join(failures))
    elapsed = time.perf_counter() - started
    assert r2 >= 0.99
    assert last_decile <= 2 * first_decile
    assert elapsed < 30.0, f"benchmark took {elapsed:.1f}s"


def test_criterion_2_probe_readvertisement_law():
    """Immediate mode: k-th probe costs exactly 2k-1 datagrams; probe 40
    costs 79 and the cumulative total is 1600. Finishes inside 10 s."""
    started = time.perf_counter()
    hub, clock = fresh_net()
    node = BusNode("host", clock, hub)
    composite = Composite(node, "room")
    begin = hub.mark()
    per_step = []
    for k in range(1, 41):
        mark = hub.mark()
        composite.add_probe("sink", f"Probe{k}", (ValueKind.INT,))
        per_step.append(hub.discovery_total(mark))
    assert per_step == [2 * k - 1 for k in range(1, 41)]
    assert per_step[39] == 79
    assert hub.discovery_total(begin) == 1600
    assert time.perf_counter() - started < 10.0


def test_criterion_3_batch_optimization():
    """begin/commit around 40 probe additions emits exactly 40 messages,
    a 40x reduction over criterion 2's 1600."""
    hub, clock = fresh_net()
    node = BusNode("host", clock, hub)
    composite = Composite(node, "room")
    composite.begin_adaptation()
    mark = hub.mark()
    for k in range(1, 41):
        composite.add_probe("sink", f"Probe{k}", (ValueKind.INT,))
    composite.commit_adaptation()
    total = hub.discovery_total(mark)
    assert total == 40
    assert 1600 // total == 40


def test_criterion_4_standard_light_proxy_shape():
    """The light fixture generates a 10-input / 2-output proxy, and
    SetTarget(75) round-trips: device state 75, Status event delivered
    through the assembly within the same dispatch cycle."""
    hub, clock = fresh_net()
    fleet = DeviceFleet(hub, clock)
    consumer = BusNode("consumer", clock, hub)
    device = fleet.spawn(standard_light(), "light-1")

    descriptor, mapping = generate_proxy_type(consumer.describe("light-1"))
    assert len(descriptor.inputs) == 10
    assert len(descriptor.outputs) == 2

    container = Container("app")
    instantiate_proxy(container, consumer, mapping, "light")
    container.register_type(recorder_descriptor("rec", ValueKind.BOOL),
                            RecorderBehavior)
    container.instantiate("rec", "status_log")
    container.bind("light.evt_Status", "status_log.in")
    container.register_type(ComponentTypeDescriptor(
        "trigger", outputs=(PortSpec.output("out", ValueKind.INT),)))
    container.instantiate("trigger", "t")
    container.bind("t.out", "light.SetTarget")

    container.emit("t", "out", (75,))  # one dispatch cycle
    assert device.state["Target"] == 75
    assert seen(container, "status_log") == [(True,)]


def _deterministic_assembly(raw_fanout: bool) -> bytes:
    container = Container("det")
    container.register_type(ComponentTypeDescriptor(
        "emit_int", outputs=(PortSpec.output("out", ValueKind.INT),)))
    container.register_type(make_sequence_descriptor("seq2_int", (ValueKind.INT,)))
    container.register_type(ComponentTypeDescriptor(
        "relay", inputs=(PortSpec.input("in", ValueKind.INT),),
        outputs=(PortSpec.output("out", ValueKind.INT),)), RelayBehavior)
    container.register_type(recorder_descriptor("rec", ValueKind.INT),
                            RecorderBehavior)

    container.instantiate("emit_int", "e")
    for rid in ("r1", "r2", "r3", "r4"):
        container.instantiate("relay", rid)
    for cid in ("c1", "c2", "c3"):
        container.instantiate("rec", cid)
    if raw_fanout:
        container.instantiate("rec", "c4")
        container.instantiate("rec", "c5")
        # ten components; fan-out handled by binding order alone
        container.bind("e.out", "r1.in", "r2.in", "r3.in")
        container.bind("e.out", "r4.in", "c4.in")
        container.bind("r1.out", "c1.in")
        container.bind("r2.out", "c2.in")
        container.bind("r3.out", "c3.in")
        container.bind("r4.out", "c5.in")
    else:
        container.instantiate("seq2_int", "s1")
        container.instantiate("seq2_int", "s2")
        # ten components; every output port has at most one binding and all
        # fan-out goes through sequence components
        container.bind("e.out", "s1.in")
        container.bind("s1.out1", "r1.in")
        container.bind("r1.out", "c1.in")
        container.bind("s1.out2", "s2.in")
        container.bind("s2.out1", "r2.in")
        container.bind("r2.out", "c2.in")
        container.bind("s2.out2", "r3.in")
        container.bind("r3.out", "r4.in")
        container.bind("r4.out", "c3.in")
    assert len(container.snapshot().instances) == 10
    return container.emit("e", "out", (7,)).canonical_json()


def test_criterion_5_determinism_suite():
    """100 rebuilt runs with sequences and unique bindings are byte
    identical; so are 100 raw fan-out runs under the fixed dispatch
    order."""
    sequenced = _deterministic_assembly(raw_fanout=False)
    assert all(_deterministic_assembly(False) == sequenced for _ in range(99))
    fanout = _deterministic_assembly(raw_fanout=True)
    assert all(_deterministic_assembly(True) == fanout for _ in range(99))
    assert sequenced != fanout  # different topologies, different traces


def test_criterion_6_dynamic_infrastructure():
    """Appear -> auto proxy; silent death -> loss exactly at the lease
    deadline; freeze policy; compatible reappearance rebinds with
    property values intact."""
    hub, clock = fresh_net()
    fleet = DeviceFleet(hub, clock)
    app_node = BusNode("app", clock, hub)
    container = Container("app")
    supervisor = ProxySupervisor(container, app_node)

    found, lost = [], []
    app_node.watch("slca:light:*",
                   lambda s: found.append((s.service_uid, clock.now())),
                   lambda uid: lost.append((uid, clock.now())))
    supervisor.auto_instantiate(
        "slca:light:*", DisappearancePolicy("freeze", "slca:light:*"))

    fleet.spawn(standard_light(), "light-1", lease_seconds=60)
    assert found == [("light-1", 0.0)]          # exactly one on_found
    assert container.has_instance("proxy-light-1")
    container.set_property("proxy-light-1", "remote_timeout_ms", 4321)

    fleet.kill("light-1", graceful=False)       # crash: no BYEBYE
    clock.advance(59.9)
    assert lost == []                            # not yet: lease still valid
    clock.advance(0.1)
    assert lost == [("light-1", 60.0)]           # exactly at lease expiry
    behavior = container.behavior_of("proxy-light-1")
    assert behavior.frozen

    replacement = fleet.spawn(standard_light(), "light-2")
    assert not behavior.frozen                   # compatible: rebound
    assert behavior.service_uid == "light-2"
    assert container.get_property("proxy-light-1", "remote_timeout_ms") == 4321

    container.register_type(ComponentTypeDescriptor(
        "trigger", outputs=(PortSpec.output("out", ValueKind.INT),)))
    container.instantiate("trigger", "t")
    container.bind("t.out", "proxy-light-1.SetTarget")
    container.emit("t", "out", (30,))
    assert replacement.state["Target"] == 30


def test_criterion_7_hierarchy():
    """room -> floor -> building: the building-level sink toggles the
    room's lights; every level's assembly matches its construction; and
    intra-composite dispatch never touches the transport."""
    hub, clock = fresh_net()
    fleet = DeviceFleet(hub, clock)
    library = standard_library()

    room_node = BusNode("room-node", clock, hub)
    room = Composite(room_node, "room", library)
    fleet.spawn(standard_light(), "light-a")
    fleet.spawn(standard_light(), "light-b")
    room_node.search("slca:light:*")
    room_supervisor = ProxySupervisor(room.container, room_node)
    room.add_probe("sink", "ToggleAll", ())
    for uid in ("light-a", "light-b"):
        room_supervisor.instantiate(uid, f"light-{uid}",
                                    DisappearancePolicy("remove"))
        room.container.bind("sink-ToggleAll.ToggleAll", f"light-{uid}.Toggle")

    floor_node = BusNode("floor-node", clock, hub)
    floor = Composite(floor_node, "floor", library)
    floor_node.search("*")
    floor.add_probe("sink", "ToggleFloor", ())
    room_proxy, floor_supervisor = compose_hierarchy(
        floor, room.functional_uid("sink", "ToggleAll"))
    floor.container.bind("sink-ToggleFloor.ToggleFloor",
                         f"{room_proxy}.ToggleAll")

    building_node = BusNode("building-node", clock, hub)
    building = Composite(building_node, "building", library)
    building_node.search("*")
    building.add_probe("sink", "ToggleBuilding", ())
    floor_proxy, _ = compose_hierarchy(
        building, floor.functional_uid("sink", "ToggleFloor"))
    building.container.bind("sink-ToggleBuilding.ToggleBuilding",
                            f"{floor_proxy}.ToggleFloor")

    operator = BusNode("operator", clock, hub)
    operator.search("*")
    assert fleet.device("light-a").state["Status"] is False
    operator.invoke(building.functional_uid("sink", "ToggleBuilding"),
                    "ToggleBuilding", [])
    assert fleet.device("light-a").state["Status"] is True
    assert fleet.device("light-b").state["Status"] is True

    # each level's assembly matches what was constructed
    room_doc = ControlClient(operator, room.control_uid).get_assembly()
    assert sorted(i["instance_id"] for i in room_doc["instances"]) == \
        ["light-light-a", "light-light-b", "sink-ToggleAll"]
    assert len(room_doc["bindings"]) == 2
    floor_doc = ControlClient(operator, floor.control_uid).get_assembly()
    assert sorted(i["instance_id"] for i in floor_doc["instances"]) == \
        sorted([room_proxy, "sink-ToggleFloor"])
    assert len(floor_doc["bindings"]) == 1
    building_doc = ControlClient(operator, building.control_uid).get_assembly()
    assert sorted(i["instance_id"] for i in building_doc["instances"]) == \
        sorted([floor_proxy, "sink-ToggleBuilding"])
    assert len(building_doc["bindings"]) == 1

    # locality: a purely internal dispatch crosses no transport
    room.container.register_type(recorder_descriptor("rec", ValueKind.INT),
                                 RecorderBehavior)
    room.container.register_type(ComponentTypeDescriptor(
        "emit_int", outputs=(PortSpec.output("out", ValueKind.INT),)))
    room.container.instantiate("rec", "r")
    room.container.instantiate("emit_int", "e")
    room.container.bind("e.out", "r.in")
    mark = hub.mark()
    room.container.emit("e", "out", (1,))
    assert hub.since(mark) == []
    assert seen(room.container, "r") == [(1,)]


def test_criterion_8_control_interface_round_trip():
    """A second composite drives the first's structure using only a proxy
    for its control service; the assembly diff is exactly the two edits."""
    hub, clock = fresh_net()
    target_node = BusNode("target-node", clock, hub)
    target = Composite(target_node, "target", standard_library())
    target_control = ControlClient(target_node, target.control_uid)
    target_control.add_type("relay_int")
    target_control.add_type("recorder_int")
    target_control.add_instance("relay_int", "existing")

    controller_node = BusNode("controller-node", clock, hub)
    controller = Composite(controller_node, "controller")
    controller_node.search("slca:control:*")
    supervisor = ProxySupervisor(controller.container, controller_node)
    supervisor.instantiate(target.control_uid, "ctl",
                           DisappearancePolicy("remove"))

    before = ControlClient(controller_node, target.control_uid).get_assembly()

    # drive the edits through the proxy's input ports only
    controller.container.register_type(ComponentTypeDescriptor(
        "cmd3", outputs=(PortSpec.output(
            "out", ValueKind.STRING, ValueKind.STRING, ValueKind.STRING),)))
    controller.container.register_type(ComponentTypeDescriptor(
        "cmd1", outputs=(PortSpec.output("out", ValueKind.STRING),)))
    controller.container.instantiate("cmd3", "add_instance")
    controller.container.instantiate("cmd1", "add_binding")
    controller.container.bind("add_instance.out", "ctl.AddInstance")
    controller.container.bind("add_binding.out", "ctl.AddBinding")
    controller.container.emit("add_instance", "out",
                              ("recorder_int", "fresh", "{}"))
    binding_doc = json.dumps({
        "binding_id": "b-new",
        "source": {"instance_id": "existing", "port_id": "out"},
        "targets": [{"instance_id": "fresh", "port_id": "in"}],
    })
    controller.container.emit("add_binding", "out", (binding_doc,))

    after = ControlClient(controller_node, target.control_uid).get_assembly()

    new_instances = [i for i in after["instances"]
                     if i not in before["instances"]]
    gone_instances = [i for i in before["instances"]
                      if i not in after["instances"]]
    new_bindings = [b for b in after["bindings"]
                    if b not in before["bindings"]]
    gone_bindings = [b for b in before["bindings"]
                     if b not in after["bindings"]]
    assert [i["instance_id"] for i in new_instances] == ["fresh"]
    assert gone_instances == []
    assert [b["binding_id"] for b in new_bindings] == ["b-new"]
    assert gone_bindings == []
    assert before["types"] == after["types"]
    # and the binding is live: events flow from existing to fresh
    target.container.emit("existing", "out", (11,))
    assert seen(target.container, "fresh") == [11]
