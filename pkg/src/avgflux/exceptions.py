"""Exception types shared across the solver modules."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class MeshError(ValueError):
    """Invalid discretization parameters."""


class StepFailure(RuntimeError):
    """The per-step nonlinear solve did not converge.

    The failing node index is kept in :attr:`node` so callers can report
    where the marching scheme broke down.
    """

    def __init__(self, node: int, message: str) -> None:
        super().__init__(f"step {node}: {message}")
        self.node = node


class SeriesTruncationError(ArithmeticError):
    """A truncated series is too short to be trusted at the requested time."""

    def __init__(self, message: str, needed_order: int) -> None:
        super().__init__(message)
        self.needed_order = needed_order


class QuadratureFailure(RuntimeError):
    """An adaptive quadrature did not reach its requested accuracy."""
