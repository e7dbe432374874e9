"""Time meshes graded towards t = 0 and uniform spatial grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import MeshError

DEFAULT_GRADING = 2.0


@dataclass(frozen=True, eq=False)
class GradedMesh:
    """Nodes ``t_j = T (j/N)^r`` for ``j = 0..N``."""

    horizon: float
    count: int
    grading: float
    nodes: np.ndarray

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def times(self) -> np.ndarray:
        """Nodes carrying solution values (``t_0 = 0`` excluded)."""
        return self.nodes[1:]

    def __len__(self) -> int:
        return self.count + 1

    def refined(self) -> GradedMesh:
        return build_graded(self.horizon, 2 * self.count, self.grading)


def build_graded(T: float, N: int, r: float = DEFAULT_GRADING) -> GradedMesh:
    if not (math.isfinite(T) and T > 0):
        raise MeshError(f"horizon must be positive, got {T!r}")
    if int(N) != N or N < 2:
        raise MeshError(f"need at least 2 intervals, got {N!r}")
    if not (math.isfinite(r) and r >= 1):
        raise MeshError(f"grading must be >= 1, got {r!r}")
    N = int(N)
    j = np.arange(N + 1, dtype=float)
    nodes = T * (j / N) ** r
    nodes[-1] = T
    nodes.flags.writeable = False
    return GradedMesh(float(T), N, float(r), nodes)


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Uniform grid on ``[0, L]`` (``symmetric=False``) or ``[-L, L]``."""

    half_width: float
    count: int
    symmetric: bool
    nodes: np.ndarray

    @property
    def spacing(self) -> float:
        return float(self.length / (self.count - 1))

    @property
    def length(self) -> float:
        return 2 * self.half_width if self.symmetric else self.half_width

    def refined(self) -> SpatialGrid:
        """Grid with every interval halved."""
        return build_spatial(self.half_width, 2 * self.count - 1, self.symmetric)


def build_spatial(L: float, M: int, symmetric: bool = False) -> SpatialGrid:
    if not (math.isfinite(L) and L > 0):
        raise MeshError(f"half width must be positive, got {L!r}")
    if int(M) != M or M < 3:
        raise MeshError(f"need at least 3 grid points, got {M!r}")
    M = int(M)
    i = np.arange(M, dtype=float)
    if symmetric:
        # integer numerators keep y_i == -y_(M-1-i) exactly
        nodes = L * (2 * i - (M - 1)) / (M - 1)
    else:
        nodes = L * i / (M - 1)
    nodes.flags.writeable = False
    return SpatialGrid(float(L), M, bool(symmetric), nodes)


def default_half_width(T: float) -> float:
    """Truncation ``12 sqrt(T)``: Gaussian tails of the heat kernel are ~1e-15 there."""
    return 12.0 * math.sqrt(T)
