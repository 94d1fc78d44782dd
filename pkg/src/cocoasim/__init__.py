"""Deterministic discrete-event simulator for fair-queuing disciplines
with per-flow adaptive buffer sizing."""

from .core import Engine, SimulationError
from .harness import (Scenario, SimResult, load_scenario, parse_scenario,
                      preset_scenario, run_scenario, run_suite, simulate)
from .link import BottleneckLink, Packet, RateSchedule
from .metrics import MetricsCollector, RunSummary
from .sched import (CocoaParams, CocoaScheduler, FqCodelScheduler, FqScheduler)

__version__ = "0.1.0"

__all__ = [
    "Engine", "SimulationError", "Packet", "RateSchedule", "BottleneckLink",
    "FqScheduler", "FqCodelScheduler", "CocoaScheduler", "CocoaParams",
    "MetricsCollector", "RunSummary", "Scenario", "SimResult",
    "parse_scenario", "load_scenario", "preset_scenario", "simulate",
    "run_scenario", "run_suite", "__version__",
]
