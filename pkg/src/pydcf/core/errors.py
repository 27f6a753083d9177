"""Exception types shared by the analytic, oracle, and simulation layers.

Every type subclasses a builtin so callers that only care about the broad
category can keep catching ``ValueError`` or ``RuntimeError``.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .models import ResidualTriple, Solution


class ScenarioValidationError(ValueError):
    """A scenario (or one of its sub-configs) violates a stated invariant."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(message)
        self.field = field


class DegenerateInputError(ValueError):
    """Inputs for which a closed form is undefined, e.g. p_F driven to 1."""


class ReducibleChainError(ValueError):
    """The requested Markov chain has no unique stationary distribution."""


class NonConvergenceError(RuntimeError):
    """The coupled fixed-point iteration exhausted its iteration budget."""

    def __init__(
        self,
        message: str,
        solution: "Solution",
        residual: "ResidualTriple",
        history: list[dict[str, Any]],
    ) -> None:
        super().__init__(message)
        self.solution = solution
        self.residual = residual
        self.history = history
