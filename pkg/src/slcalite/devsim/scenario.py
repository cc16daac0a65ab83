"""Scripted fleet scenarios: timed spawn/kill/set_state/assert steps.

Scenario files are JSON (schema in docs/scenario.md). Under the mock
clock and loopback transport a scenario is fully deterministic: two runs
of the same script produce identical logs, which is what the golden-log
fixtures pin down.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..bus import BusNode, ServiceSighting
from ..clock import Clock, MockClock
from ..errors import AssertionFailed
from .fleet import DeviceFleet

VALID_OPS = ("spawn", "kill", "set_state", "assert")


@dataclass(frozen=True)
class Step:
    at: float
    op: str
    params: Dict[str, Any]


@dataclass
class ScenarioScript:
    steps: List[Step]

    def validate(self) -> None:
        last = float("-inf")
        live: set = set()
        for i, step in enumerate(self.steps):
            if step.op not in VALID_OPS:
                raise ValueError(f"step {i}: unknown op {step.op!r}")
            if step.at < last:
                raise ValueError(f"step {i}: time {step.at} goes backwards")
            last = step.at
            if step.op == "spawn":
                uid = step.params["uid"]
                if uid in live:
                    raise ValueError(f"step {i}: uid {uid!r} already live")
                live.add(uid)
            elif step.op == "kill":
                live.discard(step.params["uid"])


def parse_scenario(source: Union[str, Path, dict]) -> ScenarioScript:
    if isinstance(source, Path):
        doc = json.loads(source.read_text())
    elif isinstance(source, str):
        doc = json.loads(source)
    else:
        doc = source
    steps = []
    for raw in doc["steps"]:
        params = {k: v for k, v in raw.items() if k not in ("at", "op")}
        steps.append(Step(at=float(raw["at"]), op=raw["op"], params=params))
    script = ScenarioScript(steps)
    script.validate()
    return script


@dataclass
class ScenarioLog:
    entries: List[Dict[str, Any]] = field(default_factory=list)

    def add(self, t: float, event: str, **detail) -> None:
        entry = {"t": t, "event": event}
        entry.update(detail)
        self.entries.append(entry)

    def canonical(self) -> str:
        return "\n".join(
            json.dumps(e, sort_keys=True, separators=(",", ":"))
            for e in self.entries) + "\n"

    def events(self, name: str) -> List[Dict[str, Any]]:
        return [e for e in self.entries if e["event"] == name]


class _Observer:
    """Watches the whole bus on behalf of the scenario runner."""

    def __init__(self, hub, clock: Clock, log: ScenarioLog):
        self.node = BusNode("scenario-observer", clock, hub)
        self.clock = clock
        self.log = log
        self.found_counts: Dict[str, int] = {}
        self.lost_counts: Dict[str, int] = {}
        self.node.watch("*", self._on_found, self._on_lost)

    def _on_found(self, sighting: ServiceSighting) -> None:
        self.found_counts[sighting.service_uid] = \
            self.found_counts.get(sighting.service_uid, 0) + 1
        self.log.add(self.clock.now(), "found", uid=sighting.service_uid,
                     kinds=sorted(sighting.service_kinds))

    def _on_lost(self, uid: str) -> None:
        self.lost_counts[uid] = self.lost_counts.get(uid, 0) + 1
        self.log.add(self.clock.now(), "lost", uid=uid)

    def visible(self, uid: str) -> bool:
        return any(s.service_uid == uid for s in self.node.known_sightings("*"))


def run_scenario(fleet: DeviceFleet, script: ScenarioScript,
                 settle_seconds: float = 0.0) -> ScenarioLog:
    """Execute a script against a fleet, returning the full log.

    With a MockClock the run is instantaneous and deterministic; with a
    real clock the runner sleeps between steps.
    """
    log = ScenarioLog()
    observer = _Observer(fleet.hub, fleet.clock, log)
    mark = fleet.hub.mark()

    def drain_network() -> None:
        nonlocal mark
        for record in fleet.hub.since(mark):
            detail = {"channel": record.channel, "kind": record.kind}
            uid = record.doc.get("service_uid")
            if uid:
                detail["uid"] = uid
            log.add(fleet.clock.now(), "net", **detail)
        mark = fleet.hub.mark()

    now = fleet.clock.now()
    start = now
    for index, step in enumerate(script.steps):
        target = start + step.at
        if target > now:
            fleet.clock.sleep(target - now)
            now = target
        drain_network()  # traffic caused by timers while time passed
        if step.op == "spawn":
            fleet.spawn(step.params["model"], step.params["uid"],
                        lease_seconds=step.params.get("lease_seconds"))
            log.add(now, "spawn", uid=step.params["uid"],
                    model=step.params["model"])
        elif step.op == "kill":
            fleet.kill(step.params["uid"],
                       graceful=step.params.get("graceful", True))
            log.add(now, "kill", uid=step.params["uid"],
                    graceful=step.params.get("graceful", True))
        elif step.op == "set_state":
            fleet.device(step.params["uid"]).set_state(
                step.params["var"], step.params["value"])
            log.add(now, "set_state", uid=step.params["uid"],
                    var=step.params["var"], value=step.params["value"])
        elif step.op == "assert":
            ok, detail = _evaluate(step.params["that"], fleet, observer)
            log.add(now, "assert", that=step.params["that"], ok=ok,
                    detail=detail)
            if not ok:
                raise AssertionFailed(
                    f"step {index} at t={step.at}: {step.params['that']} "
                    f"(observed {detail})")
        drain_network()
    if settle_seconds:
        fleet.clock.sleep(settle_seconds)
        drain_network()
    observer.node.close()
    return log


def _evaluate(predicate: Dict[str, Any], fleet: DeviceFleet,
              observer: _Observer):
    kind = predicate["kind"]
    expected = predicate.get("equals")
    if kind == "device_state":
        actual = fleet.device(predicate["uid"]).state[predicate["var"]]
    elif kind == "service_visible":
        actual = observer.visible(predicate["uid"])
    elif kind == "found_count":
        actual = observer.found_counts.get(predicate["uid"], 0)
    elif kind == "lost_count":
        actual = observer.lost_counts.get(predicate["uid"], 0)
    else:
        raise ValueError(f"unknown predicate kind {kind!r}")
    return actual == expected, actual
