"""Simulated device fleet: each device is an independent bus node."""

from __future__ import annotations

import threading
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from ..bus import BusNode, ServiceHandler
from ..clock import Clock
from ..config import NodeConfig
from ..errors import DuplicateServiceUid, MethodNotFound, UnknownVariable
from ..transport import LoopbackHub
from ..values import conforms
from .models import DeviceModel, TEMPLATES


class SimulatedDevice(ServiceHandler):
    """A running device: model state plus its own advertised service."""

    def __init__(self, model: DeviceModel, uid: str, node: BusNode):
        self.model = model
        self.uid = uid
        self.node = node
        self.state: Dict[str, Any] = model.initial_state()
        self.invocation_log: List[Tuple[str, Tuple[Any, ...]]] = []
        self._lock = threading.RLock()

    # -- ServiceHandler --

    def call(self, method: str, args: Sequence[Any]):
        behavior = self.model.method(method)
        if behavior is None:
            raise MethodNotFound(method)
        with self._lock:
            updates, returns, events = behavior.apply(self.state, tuple(args))
            self.state.update(updates)
            self.invocation_log.append((method, tuple(args)))
        for name, value in events:
            self.node.publish(self.uid, name, value)
        return returns

    def read_variable(self, name: str):
        with self._lock:
            if name not in self.state:
                raise UnknownVariable(name)
            return self.state[name]

    # -- external stimulus --

    def set_state(self, name: str, value: Any) -> None:
        var = self.model.state_var(name)
        if var is None:
            raise UnknownVariable(f"{self.uid} has no state variable {name!r}")
        if not conforms(value, var.kind):
            raise ValueError(f"{name}={value!r} is not a {var.kind}")
        with self._lock:
            changed = self.state[name] != value
            self.state[name] = value
        if changed and var.evented:
            self.node.publish(self.uid, name, value)

    def replay(self, log: Sequence[Tuple[str, Tuple[Any, ...]]]) -> Dict[str, Any]:
        """Re-run an invocation log from the initial state (purity check)."""
        state = self.model.initial_state()
        for method, args in log:
            behavior = self.model.method(method)
            updates, _, _ = behavior.apply(state, args)
            state.update(updates)
        return state


class DeviceFleet:
    """Spawns and kills simulated devices on a shared loopback network."""

    def __init__(self, hub: LoopbackHub, clock: Clock,
                 config: Optional[NodeConfig] = None):
        self.hub = hub
        self.clock = clock
        self.config = config or NodeConfig()
        self._devices: Dict[str, SimulatedDevice] = {}

    def spawn(self, model: Union[str, DeviceModel], uid: str,
              lease_seconds: Optional[int] = None) -> SimulatedDevice:
        if isinstance(model, str):
            if model not in TEMPLATES:
                raise KeyError(f"unknown device template {model!r}")
            model = TEMPLATES[model]
        if uid in self._devices:
            raise DuplicateServiceUid(uid)
        node = BusNode(uid, self.clock, self.hub, self.config)
        device = SimulatedDevice(model, uid, node)
        node.advertise(model.description(uid), device,
                       lease_seconds=lease_seconds)
        self._devices[uid] = device
        return device

    def kill(self, uid: str, graceful: bool = True) -> None:
        device = self._devices.pop(uid)
        # non-graceful: the node vanishes without a BYEBYE and peers only
        # notice at lease expiry
        device.node.close(graceful=graceful)

    def device(self, uid: str) -> SimulatedDevice:
        return self._devices[uid]

    def live_uids(self) -> List[str]:
        return sorted(self._devices)

    def close(self) -> None:
        for uid in list(self._devices):
            self.kill(uid, graceful=True)
