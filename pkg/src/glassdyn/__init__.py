"""Zero-temperature dynamics and ground states of Ising spin glasses on small graphs."""

from .disorder import Coupling, Descriptor, sample_couplings
from .glauber import BoundaryCondition, EventStream, run_glauber
from .graphs import Graph, PlanarWindow, build_square_window
from .rng import replica_seed

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "Coupling",
    "Descriptor",
    "EventStream",
    "Graph",
    "PlanarWindow",
    "build_square_window",
    "replica_seed",
    "run_glauber",
    "sample_couplings",
]
