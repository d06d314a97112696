"""entsync: discrete-event evaluation of control-plane protocols for
heralded entanglement generation in multi-peer quantum networks."""

from .engine import Engine, SchedulingError
from .network import InvariantViolation, Request
from .topology import Topology, build_topology, control_plane, matching_number

__version__ = "0.1.0"

__all__ = [
    "Engine",
    "SchedulingError",
    "InvariantViolation",
    "Request",
    "Topology",
    "build_topology",
    "control_plane",
    "matching_number",
    "__version__",
]
