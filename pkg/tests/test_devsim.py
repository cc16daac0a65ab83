import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slcalite.devsim import (
    DeviceFleet, TEMPLATES, parse_scenario, run_scenario, standard_light,
)
from slcalite.errors import AssertionFailed, DuplicateServiceUid

from golden_util import check_golden


class TestModels:
    def test_templates_cover_the_fleet(self):
        assert set(TEMPLATES) == {
            "light", "dimmable_light", "shutter", "temperature_sensor",
            "presence_sensor", "av_projector"}

    def test_standard_light_fixture_counts(self):
        model = standard_light()
        description = model.description("light-1")
        assert len(description.methods) == 10
        assert len(description.service_kinds) == 2
        assert len(description.evented_variables) == 2

    def test_evented_variables_are_state_variables(self):
        for model in TEMPLATES.values():
            state_names = {v.name for v in model.state_vars}
            for name, _ in model.evented():
                assert name in state_names

    def test_dimming_clamps_to_range(self, hub, clock):
        fleet = DeviceFleet(hub, clock)
        light = fleet.spawn("dimmable_light", "l1")
        light.call("SetLoadLevel", [250])
        assert light.state["LoadLevel"] == 100
        light.call("SetLoadLevel", [-5])
        assert light.state["LoadLevel"] == 0
        light.call("StepUp", [])
        assert light.state["LoadLevel"] == 10

    def test_toggle_flips_status(self, hub, clock):
        fleet = DeviceFleet(hub, clock)
        light = fleet.spawn("light", "l1")
        assert light.state["Status"] is False
        light.call("Toggle", [])
        assert light.state["Status"] is True
        light.call("Toggle", [])
        assert light.state["Status"] is False


class TestDevicePurity:
    method_args = {
        "SetTarget": st.integers(-100, 200).map(lambda x: [x]),
        "SetLoadLevel": st.integers(-100, 200).map(lambda x: [x]),
        "Toggle": st.just([]),
        "StepUp": st.just([]),
        "StepDown": st.just([]),
        "GetStatus": st.just([]),
        "GetTarget": st.just([]),
        "GetLoadLevel": st.just([]),
        "GetMinLevel": st.just([]),
        "GetMaxLevel": st.just([]),
    }

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_replaying_invocation_log_reproduces_state(self, data):
        from slcalite.transport import LoopbackHub
        from slcalite.clock import MockClock
        fleet = DeviceFleet(LoopbackHub(), MockClock())
        device = fleet.spawn("dimmable_light", "l1")
        methods = sorted(self.method_args)
        calls = data.draw(st.lists(st.sampled_from(methods), max_size=25))
        for method in calls:
            args = data.draw(self.method_args[method])
            device.call(method, args)
        replayed = device.replay(device.invocation_log)
        assert replayed == device.state


class TestFleet:
    def test_spawn_advertises_description(self, hub, clock, make_node):
        fleet = DeviceFleet(hub, clock)
        observer = make_node("obs")
        fleet.spawn("dimmable_light", "light-1")
        description = observer.describe("light-1")
        assert len(description.methods) == 10
        assert len(description.evented_variables) == 2

    def test_sensor_state_change_reaches_subscribers(self, hub, clock, make_node):
        fleet = DeviceFleet(hub, clock)
        observer = make_node("obs")
        sensor = fleet.spawn("temperature_sensor", "temp-1")
        got = []
        observer.subscribe("temp-1", "Temperature",
                           lambda var, value, seq: got.append(value))
        sensor.set_state("Temperature", 21.5)
        assert got == [20.0, 21.5]

    def test_duplicate_uid(self, hub, clock):
        fleet = DeviceFleet(hub, clock)
        fleet.spawn("light", "l1")
        with pytest.raises(DuplicateServiceUid):
            fleet.spawn("light", "l1")

    def test_graceful_kill_says_goodbye(self, hub, clock):
        fleet = DeviceFleet(hub, clock)
        fleet.spawn("light", "l1")
        mark = hub.mark()
        fleet.kill("l1", graceful=True)
        assert hub.discovery_counts(mark) == {"BYEBYE": 1}

    def test_crash_kill_is_silent(self, hub, clock):
        fleet = DeviceFleet(hub, clock)
        fleet.spawn("light", "l1")
        mark = hub.mark()
        fleet.kill("l1", graceful=False)
        assert hub.discovery_total(mark) == 0


SCENARIO = {
    "steps": [
        {"at": 0, "op": "spawn", "model": "dimmable_light", "uid": "light-1",
         "lease_seconds": 60},
        {"at": 0.5, "op": "spawn", "model": "temperature_sensor",
         "uid": "temp-1", "lease_seconds": 60},
        {"at": 1, "op": "set_state", "uid": "temp-1", "var": "Temperature",
         "value": 23.5},
        {"at": 2, "op": "assert",
         "that": {"kind": "device_state", "uid": "temp-1",
                  "var": "Temperature", "equals": 23.5}},
        {"at": 3, "op": "assert",
         "that": {"kind": "found_count", "uid": "light-1", "equals": 1}},
        {"at": 5, "op": "kill", "uid": "light-1", "graceful": True},
        {"at": 5.5, "op": "assert",
         "that": {"kind": "lost_count", "uid": "light-1", "equals": 1}},
        # temp-1 announced at t=0.5 with a 60 s lease and died silently at
        # t=6: the observer only notices at the lease deadline, t=60.5
        {"at": 6, "op": "kill", "uid": "temp-1", "graceful": False},
        {"at": 60.4, "op": "assert",
         "that": {"kind": "lost_count", "uid": "temp-1", "equals": 0}},
        {"at": 60.6, "op": "assert",
         "that": {"kind": "lost_count", "uid": "temp-1", "equals": 1}},
        {"at": 61, "op": "assert",
         "that": {"kind": "service_visible", "uid": "temp-1", "equals": False}},
    ]
}


class TestScenario:
    def test_validation_rejects_time_travel(self):
        with pytest.raises(ValueError):
            parse_scenario({"steps": [
                {"at": 5, "op": "kill", "uid": "x"},
                {"at": 1, "op": "kill", "uid": "y"},
            ]})

    def test_validation_rejects_duplicate_live_uid(self):
        with pytest.raises(ValueError):
            parse_scenario({"steps": [
                {"at": 0, "op": "spawn", "model": "light", "uid": "x"},
                {"at": 1, "op": "spawn", "model": "light", "uid": "x"},
            ]})

    def test_graceful_vs_crash_loss_timing(self, hub, clock):
        fleet = DeviceFleet(hub, clock)
        log = run_scenario(fleet, parse_scenario(SCENARIO))
        asserts = log.events("assert")
        assert all(a["ok"] for a in asserts)
        lost = log.events("lost")
        assert [(e["uid"], e["t"]) for e in lost] == [
            ("light-1", 5.0), ("temp-1", 60.5)]

    def test_failed_assert_raises(self, hub, clock):
        fleet = DeviceFleet(hub, clock)
        script = parse_scenario({"steps": [
            {"at": 0, "op": "spawn", "model": "light", "uid": "l1"},
            {"at": 1, "op": "assert",
             "that": {"kind": "service_visible", "uid": "l1",
                      "equals": False}},
        ]})
        with pytest.raises(AssertionFailed):
            run_scenario(fleet, script)

    def test_two_runs_identical_logs(self):
        from slcalite.transport import LoopbackHub
        from slcalite.clock import MockClock

        def run():
            fleet = DeviceFleet(LoopbackHub(), MockClock())
            return run_scenario(fleet, parse_scenario(SCENARIO)).canonical()

        assert run() == run()

    def test_real_clock_scenario(self):
        # the same machinery on wall time; kept sub-second
        from slcalite.transport import LoopbackHub
        from slcalite.clock import RealClock
        clock = RealClock()
        fleet = DeviceFleet(LoopbackHub(), clock)
        script = parse_scenario({"steps": [
            {"at": 0, "op": "spawn", "model": "light", "uid": "l1"},
            {"at": 0.05, "op": "set_state", "uid": "l1", "var": "Status",
             "value": True},
            {"at": 0.1, "op": "assert",
             "that": {"kind": "device_state", "uid": "l1", "var": "Status",
                      "equals": True}},
            {"at": 0.15, "op": "kill", "uid": "l1", "graceful": True},
            {"at": 0.2, "op": "assert",
             "that": {"kind": "lost_count", "uid": "l1", "equals": 1}},
        ]})
        log = run_scenario(fleet, script)
        assert all(a["ok"] for a in log.events("assert"))
        clock.close()

    def test_golden_scenario_log(self):
        from slcalite.transport import LoopbackHub
        from slcalite.clock import MockClock
        fleet = DeviceFleet(LoopbackHub(), MockClock())
        log = run_scenario(fleet, parse_scenario(SCENARIO))
        check_golden("scenario_log.jsonl", log.canonical().encode())
