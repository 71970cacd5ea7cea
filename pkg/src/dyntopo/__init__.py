"""Cooperative COHDA optimization over static and shrinking communication topologies."""

from .benchmarks import FUNCTION_NAMES, ObjectiveFunction, evaluate, make_function
from .simnet import RunConfig, RunRecord, run
from .topology import Topology, adapt, build_static, removal_schedule, validate

__all__ = [
    "FUNCTION_NAMES", "ObjectiveFunction", "evaluate", "make_function",
    "RunConfig", "RunRecord", "run",
    "Topology", "adapt", "build_static", "removal_schedule", "validate",
]
__version__ = "0.1.0"
