"""Small-scale HHL linear-system solver on a home-grown state-vector and density-matrix simulator."""

from .errors import HHLLabError
from .hhl import (
    HHLProblem,
    HHLResult,
    build_hhl_circuit,
    preprocess,
    run_hhl,
    verify_solution,
    worked_example,
)

__all__ = [
    "HHLLabError",
    "HHLProblem",
    "HHLResult",
    "build_hhl_circuit",
    "preprocess",
    "run_hhl",
    "verify_solution",
    "worked_example",
]

__version__ = "0.1.0"
