"""Semantic exception hierarchy.

Public functions raise these rather than bare ValueError/RuntimeError so the
CLI can map failure classes to exit codes (domain -> 2, budget -> 3).
"""


class HyperconnError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HyperconnError, ValueError):
    """Input outside the mathematical or configured domain of an operation."""


class ConvergenceError(HyperconnError, RuntimeError):
    """A root solve failed to converge.

    For valid inputs this signals a bug, not a user error: the solved
    functions are strictly monotone on their domains.
    """


class NumericsError(HyperconnError, ArithmeticError):
    """Evaluation left the validity region of a formula (reported, not clamped)."""


class BudgetError(HyperconnError):
    """An exact computation would exceed its configured resource budget."""


class NotApplicableError(HyperconnError):
    """A bound or method has a precondition that the inputs do not meet."""
