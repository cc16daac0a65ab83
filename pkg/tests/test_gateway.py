import json

import pytest
from fastapi.testclient import TestClient

from slcalite.clock import MockClock
from slcalite.composite import ControlClient
from slcalite.config import NodeConfig
from slcalite.console import RuntimeNode
from slcalite.devsim import DeviceFleet
from slcalite.gateway import create_gateway_app
from slcalite.transport import LoopbackHub


@pytest.fixture
def runtime(hub, clock):
    return RuntimeNode(NodeConfig(node_name="gw"), clock=clock, hub=hub)


@pytest.fixture
def client(runtime):
    runtime.create_composite("room1")
    app = create_gateway_app(runtime)
    with TestClient(app) as client:
        yield client


class TestDiscoveryEndpoints:
    def test_services_reflect_fleet(self, client, runtime, hub, clock):
        fleet = DeviceFleet(hub, clock)
        fleet.spawn("dimmable_light", "light-1")
        fleet.spawn("temperature_sensor", "temp-1")
        uids = [s["uid"] for s in client.get("/services").json()]
        assert "light-1" in uids and "temp-1" in uids

    def test_service_description(self, client, runtime, hub, clock):
        DeviceFleet(hub, clock).spawn("dimmable_light", "light-1")
        doc = client.get("/services/light-1").json()
        assert len(doc["methods"]) == 10
        assert client.get("/services/ghost").status_code == 404


class TestCompositeEndpoints:
    def test_listing(self, client):
        listing = client.get("/composites").json()
        assert [c["name"] for c in listing] == ["room1"]
        assert listing[0]["publication_mode"] == "immediate"

    def test_assembly_document(self, client):
        doc = client.get("/composites/room1/assembly").json()
        assert doc == {"types": [], "instances": [], "bindings": []}
        assert client.get("/composites/nope/assembly").status_code == 404

    def test_instance_binding_lifecycle(self, client):
        assert client.post("/composites/room1/types",
                           json={"type_id": "relay_int"}).status_code == 200
        assert client.post("/composites/room1/types",
                           json={"type_id": "recorder_int"}).status_code == 200
        client.post("/composites/room1/instances",
                    json={"type_id": "relay_int", "instance_id": "a"})
        client.post("/composites/room1/instances",
                    json={"type_id": "recorder_int", "instance_id": "b"})
        response = client.post("/composites/room1/bindings",
                               json={"source": "a.out", "targets": ["b.in"]})
        binding_id = response.json()["binding_id"]
        doc = client.get("/composites/room1/assembly").json()
        assert [i["instance_id"] for i in doc["instances"]] == ["a", "b"]
        client.delete(f"/composites/room1/bindings/{binding_id}")
        client.delete("/composites/room1/instances/a")
        doc = client.get("/composites/room1/assembly").json()
        assert [i["instance_id"] for i in doc["instances"]] == ["b"]

    def test_type_mismatch_maps_to_422(self, client):
        client.post("/composites/room1/types", json={"type_id": "relay_int"})
        client.post("/composites/room1/types",
                    json={"type_id": "recorder_string"})
        client.post("/composites/room1/instances",
                    json={"type_id": "relay_int", "instance_id": "a"})
        client.post("/composites/room1/instances",
                    json={"type_id": "recorder_string", "instance_id": "s"})
        response = client.post("/composites/room1/bindings",
                               json={"source": "a.out", "targets": ["s.in"]})
        assert response.status_code == 422
        assert response.json()["error"] == "TypeMismatch"

    def test_unknown_type_maps_to_404(self, client):
        response = client.post("/composites/room1/instances",
                               json={"type_id": "nope", "instance_id": "x"})
        assert response.status_code == 404
        assert response.json()["error"] == "UnknownTypeId"

    def test_probe_endpoints(self, client):
        response = client.post("/composites/room1/probes",
                               json={"kind": "sink", "name": "SetScene",
                                     "signature": ["int"]})
        probe_id = response.json()["probe_instance_id"]
        listing = client.get("/composites").json()[0]
        assert listing["functional"] == ["gw:room1:fn:sink:SetScene"]
        client.delete(f"/composites/room1/probes/{probe_id}")
        assert client.get("/composites").json()[0]["functional"] == []

    def test_duplicate_probe_name_maps_to_422(self, client):
        client.post("/composites/room1/probes",
                    json={"kind": "sink", "name": "X", "signature": []})
        response = client.post("/composites/room1/probes",
                               json={"kind": "sink", "name": "X",
                                     "signature": []})
        assert response.status_code == 422
        assert response.json()["error"] == "DuplicateExportName"

    def test_adaptation_batching_over_http(self, client, hub):
        client.post("/composites/room1/adaptation", json={"action": "begin"})
        mark = hub.mark()
        for k in range(5):
            client.post("/composites/room1/probes",
                        json={"kind": "sink", "name": f"M{k}",
                              "signature": []})
        assert hub.discovery_total(mark) == 0
        client.post("/composites/room1/adaptation", json={"action": "commit"})
        assert hub.discovery_total(mark) == 5

    def test_commit_without_begin_maps_to_422(self, client):
        response = client.post("/composites/room1/adaptation",
                               json={"action": "commit"})
        assert response.status_code == 422
        assert response.json()["error"] == "NoOpenAdaptation"


class TestFacade:
    def test_gateway_mutations_equal_control_mutations(self, hub, clock):
        # run the same action sequence through the gateway and through a
        # raw control client; the assembly documents must be identical
        def gateway_route():
            runtime = RuntimeNode(NodeConfig(node_name="gw"),
                                  clock=MockClock(), hub=LoopbackHub())
            runtime.create_composite("room1")
            with TestClient(create_gateway_app(runtime)) as client:
                client.post("/composites/room1/types",
                            json={"type_id": "threshold"})
                client.post("/composites/room1/types",
                            json={"type_id": "recorder_bool"})
                client.post("/composites/room1/instances",
                            json={"type_id": "threshold", "instance_id": "t",
                                  "properties": {"limit": 0.7}})
                client.post("/composites/room1/instances",
                            json={"type_id": "recorder_bool",
                                  "instance_id": "r"})
                client.post("/composites/room1/bindings",
                            json={"source": "t.out", "targets": ["r.in"],
                                  "binding_id": "b-1"})
                return client.get("/composites/room1/assembly").json()

        def control_route():
            runtime = RuntimeNode(NodeConfig(node_name="gw"),
                                  clock=MockClock(), hub=LoopbackHub())
            composite = runtime.create_composite("room1")
            control = ControlClient(runtime.node, composite.control_uid)
            control.add_type("threshold")
            control.add_type("recorder_bool")
            control.add_instance("threshold", "t", {"limit": 0.7})
            control.add_instance("recorder_bool", "r")
            control.add_binding("t.out", ["r.in"], binding_id="b-1")
            return control.get_assembly()

        assert gateway_route() == control_route()


class TestWebSocket:
    def test_probe_add_pushes_interface_event(self, client):
        with client.websocket_connect("/events") as socket:
            client.post("/composites/room1/probes",
                        json={"kind": "sink", "name": "Ping",
                              "signature": []})
            seen = []
            for _ in range(8):
                event = socket.receive_json()
                seen.append(event["event"])
                if event["event"] == "interface":
                    assert event["functional"] == ["gw:room1:fn:sink:Ping"]
                    break
            assert "interface" in seen

    def test_discovery_events_forwarded(self, client, hub, clock):
        with client.websocket_connect("/events") as socket:
            DeviceFleet(hub, clock).spawn("light", "light-9")
            event = socket.receive_json()
            assert event == {"event": "discovery", "change": "found",
                             "uid": "light-9",
                             "kinds": ["slca:light:switchpower"],
                             "endpoint": "loop://light-9"}

    def test_dispatch_trace_summaries_forwarded(self, client, runtime):
        client.post("/composites/room1/probes",
                    json={"kind": "sink", "name": "Fire", "signature": []})
        with client.websocket_connect("/events") as socket:
            runtime.node.invoke("gw:room1:fn:sink:Fire", "Fire", [])
            while True:
                event = socket.receive_json()
                if event["event"] == "dispatch":
                    assert event["root"] == "sink-Fire.Fire"
                    assert event["composite"] == "room1"
                    break
