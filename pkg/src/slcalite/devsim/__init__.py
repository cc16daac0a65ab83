from .models import (
    DeviceModel, MethodBehavior, StateVar, TEMPLATES, standard_light,
)
from .fleet import DeviceFleet, SimulatedDevice
from .scenario import ScenarioLog, ScenarioScript, Step, parse_scenario, run_scenario
from .bench import (
    BenchmarkReport, Series, bench_component_creation, bench_probe_addition,
    bench_proxy_generation, linear_fit,
)
from . import report

__all__ = [
    "DeviceModel", "MethodBehavior", "StateVar", "TEMPLATES", "standard_light",
    "DeviceFleet", "SimulatedDevice",
    "ScenarioLog", "ScenarioScript", "Step", "parse_scenario", "run_scenario",
    "BenchmarkReport", "Series", "bench_component_creation",
    "bench_probe_addition", "bench_proxy_generation", "linear_fit", "report",
]
