"""Boundary flux with one transverse coordinate (space dimension n = 2).

The flux ``V(y, t)`` solves

    V(y, t) = f(y, t) - (2 / (2 sqrt(pi))^n) int_0^t (t - tau)^(-n/2)
              int_R^(n-1) F(W(eta, tau)) exp(-|y - eta|^2 / (4 (t - tau))) deta dtau,

with ``W(y, t) = (1/t) int_0^t V(y, s) ds``.  The Gaussian carries mass
``(2 sqrt(pi (t - tau)))^(n-1)``, so after normalizing it the time kernel
is the same ``1/sqrt(pi (t - tau))`` as in one dimension and the same
regularized product weights apply; at each node the history is smoothed
with the normalized Gaussian of the matching time lag.

The transverse integral is discretized with exact cell averages of the
Gaussian on the uniform ``y`` grid, the two end cells extending to
infinity (constant extrapolation of ``F(W)`` past the truncation).  Every
row of the smoothing operator then has exactly the continuous mass.
"""

from __future__ import annotations

import io
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .exceptions import DomainError, MeshError
from .mesh import GradedMesh, SpatialGrid
from .specfun import INVERSE_SQRT
from .volterra1d import UNIT, _fixed_point, weight_row

SQRT_PI = math.sqrt(math.pi)
DIMENSION = 2


class TruncationWarning(UserWarning):
    """``F(W)`` is not flat at the ends of the truncated transverse grid."""


@dataclass(frozen=True, eq=False)
class BandData:
    """Initial data independent of ``xi`` and piecewise constant in ``eta``.

    ``values[k]`` holds on ``edges[k] <= eta < edges[k+1]``; zero outside.
    Gaussian integrals of such data are sums of error functions, which the
    tensor quadrature cannot match across the jumps.
    """

    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if edges.ndim != 1 or values.shape != (edges.size - 1,) or values.size < 1:
            raise DomainError("need len(edges) == len(values) + 1 >= 2")
        if np.any(np.diff(edges) <= 0) or not np.all(np.isfinite(values)):
            raise DomainError("band edges must increase and values be finite")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)

    @classmethod
    def strip(cls, h0: float, half_width: float) -> BandData:
        """``h0`` on ``|eta| <= half_width``."""
        return cls([-half_width, half_width], [h0])

    def __call__(self, xi, eta):
        eta = np.asarray(eta, dtype=float)
        k = np.searchsorted(self.edges, eta, side="right") - 1
        inside = (k >= 0) & (k < self.values.size)
        out = np.where(inside, self.values[np.clip(k, 0, self.values.size - 1)], 0.0)
        return out + 0.0 * np.asarray(xi)

    def free_term(self, y, t: float):
        """``(1/sqrt(pi t)) sum_k values_k (erf((e_(k+1) - y)/2 sqrt(t)) - erf((e_k - y)/2 sqrt(t))) / 2``."""
        y = np.asarray(y, dtype=float)
        c = erf((self.edges - y[..., None]) / (2.0 * math.sqrt(t)))
        return 0.5 * (np.diff(c, axis=-1) @ self.values) / math.sqrt(math.pi * t)


@dataclass(frozen=True, eq=False)
class TransverseProblem:
    """Data for the ``n = 2`` flux equation.

    ``initial`` is a constant, a :class:`BandData`, or a vectorized callable
    ``h(xi, eta)``.  Callables go through a tensor Gauss rule, which is
    spectrally accurate for smooth data only.
    """

    y_grid: SpatialGrid
    mesh: GradedMesh
    initial: float | Callable
    source: Callable
    quad_order: int = 48

    def __post_init__(self) -> None:
        if not self.y_grid.symmetric:
            raise MeshError("transverse grid must cover [-L, L]")
        if not callable(self.initial):
            object.__setattr__(self, "initial", float(self.initial))

    @property
    def h0(self) -> float | None:
        return None if callable(self.initial) else self.initial


@dataclass(frozen=True, eq=False)
class TransverseFlux:
    """``V(y_k, t_j)`` and ``W(y_k, t_j)``, rows indexed by ``j = 1..N``."""

    mesh: GradedMesh
    y_grid: SpatialGrid
    values: np.ndarray
    averages: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,y,V,W\n")
        for t, vrow, wrow in zip(self.mesh.times, self.values, self.averages):
            for y, v, w in zip(self.y_grid.nodes, vrow, wrow):
                buf.write(f"{t:.17g},{y:.17g},{v:.17g},{w:.17g}\n")
        return buf.getvalue()


# Gaussian factors are below 1e-24 beyond this many standard units
_GAUSS_CUTOFF = 7.5


@dataclass(frozen=True)
class _Rules:
    rho: np.ndarray
    rho_w: np.ndarray
    z: np.ndarray
    z_w: np.ndarray


def _rules(order: int) -> _Rules:
    """Gauss-Legendre rules carrying the weights ``2 rho e^(-rho^2)`` and ``e^(-z^2)``."""
    x, w = np.polynomial.legendre.leggauss(order)
    c = 0.5 * _GAUSS_CUTOFF
    rho, rho_w = c * (x + 1.0), c * w
    x, w = np.polynomial.legendre.leggauss(2 * order)
    z, z_w = _GAUSS_CUTOFF * x, _GAUSS_CUTOFF * w
    return _Rules(rho, rho_w * 2.0 * rho * np.exp(-rho * rho), z, z_w * np.exp(-z * z))


def free_term(problem: TransverseProblem, y, t: float, rules: _Rules | None = None):
    """Flux of the free problem at ``(y, t)``.

    With ``xi = 2 sqrt(t) rho`` and ``eta = y + 2 sqrt(t) z`` the double
    integral becomes ``(1/(pi sqrt(t))) int 2 rho e^(-rho^2) int e^(-z^2) h dz drho``.
    Both factors are integrated with Gauss-Legendre on truncated ranges;
    Gauss-Laguerre in ``rho^2`` is avoided because ``h`` is smooth in
    ``rho``, not in ``rho^2``.  Band data is integrated exactly.
    """
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"t must be positive, got {t!r}")
    ya = np.asarray(y, dtype=float)
    if problem.h0 is not None:
        out = np.full(ya.shape, problem.h0 / math.sqrt(math.pi * t))
        return out if out.ndim else float(out)
    if isinstance(problem.initial, BandData):
        out = problem.initial.free_term(ya, t)
        return out if np.ndim(out) else float(out)
    r = rules or _rules(problem.quad_order)
    st = math.sqrt(t)
    xi = 2.0 * st * r.rho
    eta = ya[..., None] + 2.0 * st * r.z
    xi = xi.reshape((-1,) + (1,) * eta.ndim)
    shape = (r.rho.size,) + eta.shape
    vals = np.broadcast_to(problem.initial(xi, eta[None, ...]), shape)  # (q, ..., 2q)
    inner = np.tensordot(vals, r.z_w, axes=([-1], [0]))
    out = np.tensordot(r.rho_w, inner, axes=(0, 0)) / (math.pi * st)
    return out if np.ndim(out) else float(out)


def _edge_erf(spacing: float, M: int, lags: np.ndarray) -> np.ndarray:
    """``erf((d + 1/2) dy / (2 sqrt(s)))`` for offsets ``d = -(M-1)..M-2``, one row per lag."""
    d = np.arange(-(M - 1), M - 1, dtype=float) + 0.5
    return erf(d[None, :] * spacing / (2.0 * np.sqrt(lags)[:, None]))


def smoothing_matrix(y_grid: SpatialGrid, lag: float) -> np.ndarray:
    """Normalized transverse Gaussian of time lag ``lag`` as an ``M x M`` matrix.

    Multiply the row sums by ``(2 sqrt(pi lag))^(n-1)`` to recover the
    discrete mass of ``exp(-|y - eta|^2 / (4 lag))``.
    """
    if not lag > 0:
        raise DomainError("lag must be positive")
    M = y_grid.count
    i = np.arange(M)
    edges = (np.arange(-1, M)[None, :] - i[:, None] + 0.5) * y_grid.spacing
    c = erf(edges / (2.0 * math.sqrt(lag)))
    c[:, 0] = -1.0
    c[:, -1] = 1.0
    return 0.5 * np.diff(c, axis=1)


def gaussian_mass(y_grid: SpatialGrid, lag: float) -> np.ndarray:
    """Discrete ``int exp(-|y - eta|^2 / (4 lag)) deta`` at every grid point."""
    return smoothing_matrix(y_grid, lag).sum(axis=1) * (2.0 * math.sqrt(math.pi * lag)) ** (DIMENSION - 1)


def _smooth_batch(values: np.ndarray, lags: np.ndarray, spacing: float, index: np.ndarray) -> np.ndarray:
    """Apply the normalized smoothing of each lag to the matching row of ``values``.

    Summation by parts turns the cell weights into
    ``(F_0 + F_last)/2 + (1/2) sum_m erf(edge_m - y_i) (F_m - F_{m+1})``.
    """
    M = values.shape[1]
    c = _edge_erf(spacing, M, lags)
    diffs = values[:, :-1] - values[:, 1:]
    toe = c[:, index]  # (K, M, M-1)
    return 0.5 * (values[:, :1] + values[:, -1:]) + 0.5 * np.einsum("kim,km->ki", toe, diffs)


def solve_transverse(
    problem: TransverseProblem,
    tol: float = 1e-10,
    *,
    damping: float = 0.5,
    max_iter: int = 100,
) -> TransverseFlux:
    mesh, grid = problem.mesh, problem.y_grid
    nodes = mesh.nodes
    N, M = mesh.count, grid.count
    F = problem.source
    rules = _rules(problem.quad_order)
    f = np.zeros((N + 1, M))
    for j in range(1, N + 1):
        f[j] = free_term(problem, grid.nodes, nodes[j], rules)

    sq = np.sqrt(nodes)
    v = np.zeros((N + 1, M))
    w = np.zeros((N + 1, M))
    gv = np.zeros((N + 1, M))
    gs = np.zeros((N + 1, M))
    index = np.arange(M - 1)[None, :] - np.arange(M)[:, None] + (M - 1)
    for j in range(1, N + 1):
        t = nodes[j]
        b = weight_row(nodes, j, INVERSE_SQRT, True)
        a = weight_row(nodes, j, UNIT, True)
        if j > 1:
            lags = t - nodes[1:j]
            smoothed = _smooth_batch(gs[1:j], lags, grid.spacing, index)
            hist = b[1:j] @ smoothed
        else:
            hist = np.zeros(M)
        acc = a[:j] @ gv[:j]
        bj, aj, sj = b[j], a[j], sq[j]

        def average(vj):
            return (acc + aj * sj * vj) / t

        def phi(vj):
            return f[j] - (hist + bj * sj * F(average(vj))) / SQRT_PI

        start = f[j] - (hist + bj * sj * F(w[j - 1] if j > 1 else 2 * f[1])) / SQRT_PI
        v[j], _ = _fixed_point(phi, start, tol, damping, max_iter, j)
        w[j] = average(v[j])
        gv[j] = sj * v[j]
        gs[j] = sj * F(w[j])

    src = np.asarray(F(w[1:]), dtype=float)
    scale = np.max(np.abs(src))
    edge = max(np.max(np.abs(src[:, 0] - src[:, 1])), np.max(np.abs(src[:, -1] - src[:, -2])))
    if scale > 0 and edge > 1e-10 * scale:
        warnings.warn(
            f"F(W) varies by {edge:.3g} at the ends of the transverse grid; widen L",
            TruncationWarning,
            stacklevel=2,
        )
    return TransverseFlux(mesh, grid, v[1:], w[1:])
