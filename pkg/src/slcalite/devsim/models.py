"""Device templates for the simulated fleet.

A device model is pure data plus pure method behaviors: each behavior maps
(state, args) to (state updates, return values, events). The runtime owns
the mutable state dict, so replaying an invocation log from the initial
state always reproduces the final state.

The dimmable light is the benchmark fixture: ten methods split across the
switch-power and dimming service kinds, plus the Status and LoadLevel
evented variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from ..values import ValueKind, conforms
from ..wire import MethodSpec, ServiceDescription

# behavior: (state, args) -> (state updates, returns, events)
BehaviorFn = Callable[[Mapping[str, Any], Sequence[Any]],
                      Tuple[Dict[str, Any], List[Any], List[Tuple[str, Any]]]]


@dataclass(frozen=True)
class StateVar:
    name: str
    kind: ValueKind
    initial: Any
    evented: bool = False


@dataclass(frozen=True)
class MethodBehavior:
    spec: MethodSpec
    apply: BehaviorFn


@dataclass(frozen=True)
class DeviceModel:
    template_id: str
    service_kinds: Tuple[str, ...]
    state_vars: Tuple[StateVar, ...]
    methods: Tuple[MethodBehavior, ...]

    def validate(self) -> None:
        names = [v.name for v in self.state_vars]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.template_id}: duplicate state variable")
        for var in self.state_vars:
            if not conforms(var.initial, var.kind):
                raise ValueError(
                    f"{self.template_id}: initial {var.name}={var.initial!r} "
                    f"is not a {var.kind}")

    def initial_state(self) -> Dict[str, Any]:
        return {v.name: v.initial for v in self.state_vars}

    def evented(self) -> Tuple[Tuple[str, ValueKind], ...]:
        return tuple((v.name, v.kind) for v in self.state_vars if v.evented)

    def state_var(self, name: str) -> Optional[StateVar]:
        for var in self.state_vars:
            if var.name == name:
                return var
        return None

    def method(self, name: str) -> Optional[MethodBehavior]:
        for m in self.methods:
            if m.spec.name == name:
                return m
        return None

    def description(self, uid: str, friendly_name: str = "") -> ServiceDescription:
        return ServiceDescription(
            service_uid=uid,
            friendly_name=friendly_name or f"{self.template_id} {uid}",
            service_kinds=self.service_kinds,
            methods=tuple(m.spec for m in self.methods),
            evented_variables=self.evented(),
        )


def _events_for(state: Mapping[str, Any], updates: Dict[str, Any],
                evented_names: Sequence[str]) -> List[Tuple[str, Any]]:
    return [(name, updates[name]) for name in evented_names
            if name in updates and updates[name] != state[name]]


def _clamp(value: int, low: int, high: int) -> int:
    return max(low, min(high, value))


# --- switch-power methods -----------------------------------------------------

def _get_status(state, args):
    return {}, [state["Status"]], []


def _set_target(state, args):
    target = args[0]
    updates = {"Target": target, "Status": target != 0}
    return updates, [], _events_for(state, updates, ["Status"])


def _get_target(state, args):
    return {}, [state["Target"]], []


def _toggle(state, args):
    status = not state["Status"]
    updates = {"Status": status,
               "Target": state.get("MaxLevel", 1) if status else 0}
    return updates, [], _events_for(state, updates, ["Status"])


_SWITCH_POWER = (
    MethodBehavior(MethodSpec("GetStatus", (), (ValueKind.BOOL,)), _get_status),
    MethodBehavior(MethodSpec("SetTarget", (("newTarget", ValueKind.INT),)), _set_target),
    MethodBehavior(MethodSpec("GetTarget", (), (ValueKind.INT,)), _get_target),
    MethodBehavior(MethodSpec("Toggle", ()), _toggle),
)


# --- dimming methods ------------------------------------------------------------

def _get_load_level(state, args):
    return {}, [state["LoadLevel"]], []


def _set_load_level(state, args):
    level = _clamp(args[0], state["MinLevel"], state["MaxLevel"])
    updates = {"LoadLevel": level}
    return updates, [], _events_for(state, updates, ["LoadLevel"])


def _step_up(state, args):
    return _set_load_level(state, [state["LoadLevel"] + 10])


def _step_down(state, args):
    return _set_load_level(state, [state["LoadLevel"] - 10])


def _get_min_level(state, args):
    return {}, [state["MinLevel"]], []


def _get_max_level(state, args):
    return {}, [state["MaxLevel"]], []


_DIMMING = (
    MethodBehavior(MethodSpec("GetLoadLevel", (), (ValueKind.INT,)), _get_load_level),
    MethodBehavior(MethodSpec("SetLoadLevel", (("newLevel", ValueKind.INT),)), _set_load_level),
    MethodBehavior(MethodSpec("StepUp", ()), _step_up),
    MethodBehavior(MethodSpec("StepDown", ()), _step_down),
    MethodBehavior(MethodSpec("GetMinLevel", (), (ValueKind.INT,)), _get_min_level),
    MethodBehavior(MethodSpec("GetMaxLevel", (), (ValueKind.INT,)), _get_max_level),
)


# --- shutter ----------------------------------------------------------------------

def _shutter_move(position: int) -> BehaviorFn:
    def apply(state, args):
        updates = {"Position": position}
        return updates, [], _events_for(state, updates, ["Position"])
    return apply


def _shutter_set(state, args):
    updates = {"Position": _clamp(args[0], 0, 100)}
    return updates, [], _events_for(state, updates, ["Position"])


def _shutter_get(state, args):
    return {}, [state["Position"]], []


def _noop(state, args):
    return {}, [], []


# --- projector --------------------------------------------------------------------

def _power(on: bool) -> BehaviorFn:
    def apply(state, args):
        updates = {"Power": on}
        return updates, [], _events_for(state, updates, ["Power"])
    return apply


def _get_power(state, args):
    return {}, [state["Power"]], []


def _set_input(state, args):
    updates = {"Input": args[0]}
    return updates, [], _events_for(state, updates, ["Input"])


def _get_input(state, args):
    return {}, [state["Input"]], []


# --- sensors ---------------------------------------------------------------------

def _read_var(name: str) -> BehaviorFn:
    def apply(state, args):
        return {}, [state[name]], []
    return apply


TEMPLATES: Dict[str, DeviceModel] = {
    "light": DeviceModel(
        template_id="light",
        service_kinds=("slca:light:switchpower",),
        state_vars=(
            StateVar("Status", ValueKind.BOOL, False, evented=True),
            StateVar("Target", ValueKind.INT, 0),
        ),
        methods=_SWITCH_POWER,
    ),
    "dimmable_light": DeviceModel(
        template_id="dimmable_light",
        service_kinds=("slca:light:switchpower", "slca:light:dimming"),
        state_vars=(
            StateVar("Status", ValueKind.BOOL, False, evented=True),
            StateVar("Target", ValueKind.INT, 0),
            StateVar("LoadLevel", ValueKind.INT, 0, evented=True),
            StateVar("MinLevel", ValueKind.INT, 0),
            StateVar("MaxLevel", ValueKind.INT, 100),
        ),
        methods=_SWITCH_POWER + _DIMMING,
    ),
    "shutter": DeviceModel(
        template_id="shutter",
        service_kinds=("slca:shutter:position",),
        state_vars=(StateVar("Position", ValueKind.INT, 0, evented=True),),
        methods=(
            MethodBehavior(MethodSpec("Up", ()), _shutter_move(100)),
            MethodBehavior(MethodSpec("Down", ()), _shutter_move(0)),
            MethodBehavior(MethodSpec("Stop", ()), _noop),
            MethodBehavior(MethodSpec("SetPosition", (("newPosition", ValueKind.INT),)),
                           _shutter_set),
            MethodBehavior(MethodSpec("GetPosition", (), (ValueKind.INT,)), _shutter_get),
        ),
    ),
    "temperature_sensor": DeviceModel(
        template_id="temperature_sensor",
        service_kinds=("slca:sensor:temperature",),
        state_vars=(StateVar("Temperature", ValueKind.FLOAT, 20.0, evented=True),),
        methods=(
            MethodBehavior(MethodSpec("GetTemperature", (), (ValueKind.FLOAT,)),
                           _read_var("Temperature")),
        ),
    ),
    "presence_sensor": DeviceModel(
        template_id="presence_sensor",
        service_kinds=("slca:sensor:presence",),
        state_vars=(StateVar("Presence", ValueKind.BOOL, False, evented=True),),
        methods=(
            MethodBehavior(MethodSpec("GetPresence", (), (ValueKind.BOOL,)),
                           _read_var("Presence")),
        ),
    ),
    "av_projector": DeviceModel(
        template_id="av_projector",
        service_kinds=("slca:av:projector",),
        state_vars=(
            StateVar("Power", ValueKind.BOOL, False, evented=True),
            StateVar("Input", ValueKind.STRING, "hdmi1", evented=True),
        ),
        methods=(
            MethodBehavior(MethodSpec("PowerOn", ()), _power(True)),
            MethodBehavior(MethodSpec("PowerOff", ()), _power(False)),
            MethodBehavior(MethodSpec("GetPower", (), (ValueKind.BOOL,)), _get_power),
            MethodBehavior(MethodSpec("SetInput", (("name", ValueKind.STRING),)),
                           _set_input),
            MethodBehavior(MethodSpec("GetInput", (), (ValueKind.STRING,)), _get_input),
        ),
    ),
}

for _model in TEMPLATES.values():
    _model.validate()


def standard_light() -> DeviceModel:
    """The benchmark fixture: 10 methods, 2 service kinds, 2 evented variables."""
    return TEMPLATES["dimmable_light"]
