"""Connectivity probabilities and counts of r-uniform hypergraphs.

Analytic formulas (fixed points, rate, prefactor, expansions), exact
enumeration oracles, branching-process point probabilities, seeded Monte
Carlo samplers, and the statistical checks that tie them together.
"""

from ._version import __version__
from . import analytic, branching, enumeration, simulation, stats
from .errors import (
    BudgetError,
    ConvergenceError,
    DomainError,
    HyperconnError,
    NotApplicableError,
    NumericsError,
)

__all__ = [
    "__version__",
    "analytic",
    "branching",
    "enumeration",
    "simulation",
    "stats",
    "BudgetError",
    "ConvergenceError",
    "DomainError",
    "HyperconnError",
    "NotApplicableError",
    "NumericsError",
]
