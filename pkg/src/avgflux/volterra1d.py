"""Product-integration solvers for the one-dimensional averaged-flux problem.

The boundary flux ``V(t) = u_x(0, t)`` solves

    V(t) = V0(t) - int_0^t F(W(tau)) / sqrt(pi (t - tau)) dtau,
    W(t) = (1/t) int_0^t V(s) ds,

and in the linear case ``F(w) = lam * w`` with constant initial
temperature ``h0`` the average itself solves

    W(t) = 2 h0 / sqrt(pi t) - (2 lam / sqrt(pi)) (1/t) int_0^t W(tau) sqrt(t - tau) dtau.

Both unknowns behave like ``t^(-1/2)`` at the origin.  The marching schemes
therefore integrate the regularized quantity ``g = sqrt(tau) * phi(tau)``
against ``tau^(-1/2) K(t - tau)``, with ``g`` piecewise linear in
``sqrt(tau)`` and held constant on the head interval ``[0, t_1]``.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.special import roots_jacobi

from .exceptions import DomainError, QuadratureFailure, StepFailure
from .mesh import GradedMesh
from .specfun import INVERSE_SQRT, KERNEL_KINDS, PLUS_SQRT

UNIT = "unit"
_EXPONENT = {INVERSE_SQRT: -0.5, PLUS_SQRT: 0.5, UNIT: 0.0}
_QUAD_ORDER = 16

SQRT_PI = math.sqrt(math.pi)


# {{{ source terms


@dataclass(frozen=True)
class LinearSource:
    """``F(w) = lam * w``."""

    lam: float

    def __call__(self, w):
        return self.lam * np.asarray(w, dtype=float)

    @property
    def lipschitz(self) -> float:
        return abs(self.lam)


@dataclass(frozen=True, eq=False)
class TableSource:
    """Piecewise-linear ``F`` through ``(w, F(w))`` points, constant beyond the ends."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise DomainError("table source needs at least two (w, F) pairs")
        if np.any(np.diff(pts[:, 0]) <= 0):
            raise DomainError("table abscissae must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __call__(self, w):
        return np.interp(w, self.points[:, 0], self.points[:, 1])

    @property
    def lipschitz(self) -> float:
        return float(np.max(np.abs(np.diff(self.points[:, 1]) / np.diff(self.points[:, 0]))))


# }}}


@dataclass(frozen=True, eq=False)
class ProblemSpec1D:
    """Data of the one-dimensional problem.

    ``initial`` is either the constant ``h0`` or a callable ``h(x)``.
    ``source`` is the map ``F``; an optional Lipschitz bound may be declared.
    """

    initial: float | Callable[[float], float]
    source: Callable
    horizon: float
    lipschitz: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise DomainError(f"horizon must be positive, got {self.horizon!r}")
        if self.lipschitz is not None and not self.lipschitz >= 0:
            raise DomainError("declared Lipschitz bound must be >= 0")
        if not callable(self.initial):
            object.__setattr__(self, "initial", float(self.initial))

    @classmethod
    def linear(cls, h0: float, lam: float, horizon: float = 1.0) -> ProblemSpec1D:
        return cls(float(h0), LinearSource(float(lam)), horizon, abs(float(lam)))

    @property
    def h0(self) -> float | None:
        """Constant initial temperature, or ``None`` for general data."""
        return None if callable(self.initial) else self.initial

    @property
    def linear_lambda(self) -> float | None:
        return self.source.lam if isinstance(self.source, LinearSource) else None

    def h(self, x):
        x = np.asarray(x, dtype=float)
        if callable(self.initial):
            return np.vectorize(self.initial, otypes=[float])(x)
        return np.full_like(x, self.initial)


def initial_flux(spec: ProblemSpec1D, t: float) -> float:
    """Flux of the free problem, ``(2/sqrt(pi t)) int_0^inf eta e^(-eta^2) h(2 sqrt(t) eta) deta``."""
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"t must be positive, got {t!r}")
    if spec.h0 is not None:
        return spec.h0 / math.sqrt(math.pi * t)

    h = spec.initial
    st = 2.0 * math.sqrt(t)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(
                lambda eta: eta * math.exp(-eta * eta) * h(st * eta),
                0.0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200,
            )
        except (integrate.IntegrationWarning, OverflowError, ZeroDivisionError) as exc:
            raise QuadratureFailure(f"initial flux quadrature failed at t={t}: {exc}") from exc
    return 2.0 * val / math.sqrt(math.pi * t)


# {{{ product-integration weights


@lru_cache(maxsize=None)
def _rules(alpha: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(_QUAD_ORDER)
    xj, wj = roots_jacobi(_QUAD_ORDER, alpha, 0.0)
    return x, w, xj, wj


def weight_row(nodes: np.ndarray, j: int, kind: str, regularized: bool = False) -> np.ndarray:
    """Weights ``w_k``, ``k = 0..j``, of one product-integration row.

    Plain rows integrate ``phi(tau) K(t_j - tau)`` with ``phi`` piecewise
    linear in ``tau``.  Regularized rows integrate
    ``g(tau) tau^(-1/2) K(t_j - tau)`` with ``g`` piecewise linear in
    ``sqrt(tau)`` on ``[t_1, t_j]`` and equal to ``g(t_1)`` on ``[0, t_1]``;
    node 0 then gets no weight.

    Each interval is integrated with a 16-point Gauss rule; the one touching
    ``tau = t_j`` uses Gauss-Jacobi so the kernel singularity is exact.
    """
    if kind not in _EXPONENT:
        raise DomainError(f"unknown kernel kind {kind!r}")
    if j < 1:
        return np.zeros(1)
    alpha = _EXPONENT[kind]
    x, w, xj, wj = _rules(alpha)
    t = float(nodes[j])
    row = np.zeros(j + 1)

    if not regularized:
        a, b = nodes[:j], nodes[1 : j + 1]
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        if j > 1:
            tau = mid[: j - 1, None] + half[: j - 1, None] * x
            kern = (t - tau) ** alpha * w * half[: j - 1, None]
            up = (tau - a[: j - 1, None]) / (2 * half[: j - 1, None])
            row[: j - 1] += np.sum(kern * (1 - up), axis=1)
            row[1:j] += np.sum(kern * up, axis=1)
        hl = half[-1]
        tau = mid[-1] + hl * xj
        up = (tau - a[-1]) / (2 * hl)
        scale = hl ** (alpha + 1)
        row[j - 1] += scale * np.sum(wj * (1 - up))
        row[j] += scale * np.sum(wj * up)
        return row

    sig = np.sqrt(nodes[: j + 1])
    sj = sig[j]
    if j > 1:
        a, b = sig[: j - 1], sig[1:j]
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        s = mid[:, None] + half[:, None] * x
        kern = 2.0 * (t - s * s) ** alpha * w * half[:, None]
        up = (s - a[:, None]) / (2 * half[:, None])
        # head interval: g frozen at g(t_1)
        row[1] += np.sum(kern[0])
        row[1:j - 1] += np.sum(kern[1:] * (1 - up[1:]), axis=1)
        row[2:j] += np.sum(kern[1:] * up[1:], axis=1)
    a = sig[j - 1]
    hl = 0.5 * (sj - a)
    s = 0.5 * (sj + a) + hl * xj
    kern = 2.0 * hl ** (alpha + 1) * wj * (sj + s) ** alpha
    if j == 1:
        row[1] += np.sum(kern)
    else:
        up = (s - a) / (2 * hl)
        row[j - 1] += np.sum(kern * (1 - up))
        row[j] += np.sum(kern * up)
    return row


@dataclass(frozen=True, eq=False)
class SingularWeights:
    """Lower-triangular product-integration weights on a mesh.

    Row ``j`` approximates ``int_0^{t_j} phi(tau) K(t_j - tau) dtau`` by
    ``sum_k weights[j, k] * phi(t_k)``.  With ``regularized=True`` the row
    acts on ``g_k = sqrt(t_k) phi(t_k)`` instead.
    """

    kernel_kind: str
    mesh: GradedMesh
    weights: np.ndarray
    regularized: bool = False

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.weights @ np.asarray(values, dtype=float)


def build_weights(mesh: GradedMesh, kind: str, regularized: bool = False) -> SingularWeights:
    if kind not in KERNEL_KINDS and kind != UNIT:
        raise DomainError(f"unknown kernel kind {kind!r}")
    n = len(mesh)
    mat = np.zeros((n, n))
    for j in range(1, n):
        mat[j, : j + 1] = weight_row(mesh.nodes, j, kind, regularized)
    mat.flags.writeable = False
    return SingularWeights(kind, mesh, mat, regularized)


# }}}


@dataclass(frozen=True, eq=False)
class FluxSolution:
    """Boundary flux ``V`` and its running average ``W`` at ``t_1..t_N``."""

    mesh: GradedMesh
    v: np.ndarray
    w: np.ndarray
    source: np.ndarray = field(default=None)
    iterations: int = 0

    @property
    def times(self) -> np.ndarray:
        return self.mesh.times

    @property
    def regularized_v(self) -> np.ndarray:
        return np.sqrt(self.times) * self.v

    @property
    def regularized_w(self) -> np.ndarray:
        return np.sqrt(self.times) * self.w

    @property
    def visited_range(self) -> tuple[float, float]:
        """Range of ``W`` on the mesh, i.e. where ``F`` was actually sampled."""
        return float(np.min(self.w)), float(np.max(self.w))

    def running_average(self) -> np.ndarray:
        """Average of ``v`` recomputed with the regularized cumulative rule."""
        nodes = self.mesh.nodes
        g = np.concatenate([[0.0], self.regularized_v])
        out = np.empty_like(self.v)
        for j in range(1, len(nodes)):
            out[j - 1] = weight_row(nodes, j, UNIT, True) @ g[: j + 1] / nodes[j]
        return out


def _fixed_point(phi, start, tol, damping, max_iter, node):
    start = np.array(start, dtype=float)
    v = start.copy()
    prev = np.inf
    grow = 0
    for it in range(1, max_iter + 1):
        new = phi(v)
        if not np.all(np.isfinite(new)):
            raise StepFailure(node, "source evaluation produced non-finite values")
        step = np.abs(new - v)
        if np.max(step / np.maximum(1.0, np.abs(v))) <= tol:
            return new, it
        # a diverging iteration keeps the relative step flat, so watch the absolute one
        size = float(np.max(step))
        grow = grow + 1 if size >= prev else 0
        if grow >= 3:
            break
        prev = size
        v = (1 - damping) * v + damping * new
    return _bracketed(phi, start, tol, node), it


def _bracketed(phi, guess, tol, node):
    """Componentwise Brent solve of ``v = phi(v)`` after the fixed point stalls.

    The bracket grows geometrically around ``guess`` (the step predictor).
    """
    guess = np.atleast_1d(np.asarray(guess, dtype=float))
    out = np.empty_like(guess)
    for i, g0 in enumerate(guess):
        def resid(s, i=i):
            trial = guess.copy()
            trial[i] = s
            return s - phi(trial)[i]

        width = abs(g0) + 1.0
        lo, hi = g0 - width, g0 + width
        for _ in range(60):
            rl, rh = resid(lo), resid(hi)
            if not (np.isfinite(rl) and np.isfinite(rh)):
                raise StepFailure(node, "source evaluation produced non-finite values")
            if rl * rh <= 0:
                break
            width *= 2
            lo, hi = g0 - width, g0 + width
        else:
            raise StepFailure(node, "fixed-point iteration stalled and no bracket found")
        out[i] = optimize.brentq(resid, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return out


def solve_flux(
    spec: ProblemSpec1D,
    mesh: GradedMesh,
    tol: float = 1e-10,
    *,
    damping: float = 0.5,
    max_iter: int = 100,
) -> FluxSolution:
    """March the flux equation for ``V`` with the regularized product rule.

    At each node the new value enters both the running average (through the
    last interval) and the source integral; the resulting scalar equation is
    solved by a damped fixed-point iteration with a Brent fallback.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    nodes = mesh.nodes
    N = mesh.count
    F = spec.source
    v0 = np.array([initial_flux(spec, t) for t in nodes[1:]])
    sq = np.sqrt(nodes)

    v = np.zeros(N + 1)
    w = np.zeros(N + 1)
    gv = np.zeros(N + 1)  # sqrt(t) V
    gs = np.zeros(N + 1)  # sqrt(t) F(W)
    total_iter = 0
    for j in range(1, N + 1):
        t = nodes[j]
        b = weight_row(nodes, j, INVERSE_SQRT, True)
        a = weight_row(nodes, j, UNIT, True)
        hist = b[:j] @ gs[:j]
        acc = a[:j] @ gv[:j]
        bj, aj, sj = b[j], a[j], sq[j]

        def average(vj):
            return (acc + aj * sj * vj) / t

        def phi(vj):
            return v0[j - 1] - (hist + bj * sj * F(average(vj))) / SQRT_PI

        start = v0[j - 1] - (hist + bj * sj * F(w[j - 1] if j > 1 else 2 * v0[0])) / SQRT_PI
        vj, it = _fixed_point(phi, np.atleast_1d(start), tol, damping, max_iter, j)
        total_iter += it
        v[j] = vj[0]
        w[j] = average(v[j])
        gv[j] = sj * v[j]
        gs[j] = sj * float(F(w[j]))
    src = np.asarray(F(w[1:]), dtype=float)
    return FluxSolution(mesh, v[1:], w[1:], src, total_iter)


def solve_average_linear(h0: float, lam: float, mesh: GradedMesh) -> FluxSolution:
    """Solve the linear equation for ``W`` directly, then recover ``V``.

    ``V`` comes from ``V(t) = h0/sqrt(pi t) - (lam/sqrt(pi)) int_0^t W(tau)/sqrt(t - tau) dtau``
    evaluated with the same regularized rule.
    """
    nodes = mesh.nodes
    N = mesh.count
    sq = np.sqrt(nodes)
    w = np.zeros(N + 1)
    gw = np.zeros(N + 1)
    v = np.zeros(N + 1)
    for j in range(1, N + 1):
        t = nodes[j]
        c = weight_row(nodes, j, PLUS_SQRT, True)
        kappa = 2.0 * lam / (SQRT_PI * t)
        rhs = 2.0 * h0 / math.sqrt(math.pi * t) - kappa * (c[:j] @ gw[:j])
        w[j] = rhs / (1.0 + kappa * c[j] * sq[j])
        gw[j] = sq[j] * w[j]
        b = weight_row(nodes, j, INVERSE_SQRT, True)
        v[j] = h0 / math.sqrt(math.pi * t) - lam / SQRT_PI * (b @ gw[: j + 1])
    return FluxSolution(mesh, v[1:], w[1:], lam * w[1:])


@dataclass(frozen=True)
class MajorantReport:
    """Measured constants of the kernel majorant ``m(t, tau) = bound / sqrt(pi (t - tau))``."""

    bound: float
    horizon: float
    sup_integral: float
    expected_sup: float
    small_times: tuple[float, ...]
    small_integrals: tuple[float, ...]
    small_slope: float
    shifted_integrals: tuple[float, ...]
    shifted_slope: float


def _loglog_slope(x, y) -> float:
    x, y = np.log(np.asarray(x)), np.asarray(y, dtype=float)
    if np.any(y <= 0):
        return float("nan")
    return float(np.polyfit(x, np.log(y), 1)[0])


def kernel_majorant_check(bound: float, k: float, shift: float = 1.0) -> MajorantReport:
    """Integrate the majorant numerically and measure its constants.

    ``sup_{t <= k} int_0^t m(t, tau) dtau`` should be ``2 sqrt(k) bound / sqrt(pi)``
    and ``int_0^t m -> 0`` like ``sqrt(t)``.  The shifted window
    ``int_{-T}^{-T+t} m(t, tau) dtau`` (``T = shift``) also vanishes as
    ``t -> 0``.
    """
    if not (k > 0 and bound >= 0):
        raise DomainError("need k > 0 and bound >= 0")
    c = bound / SQRT_PI

    def window(t: float, lo: float, hi: float) -> float:
        if c == 0.0:
            return 0.0
        # quad's algebraic weight handles (t - tau)^(-1/2) at tau = t exactly
        if hi >= t:
            val, _ = integrate.quad(lambda s: c, lo, hi, weight="alg", wvar=(0.0, -0.5),
                                    epsabs=0.0, epsrel=1e-13)
        else:
            val, _ = integrate.quad(lambda s: c / math.sqrt(t - s), lo, hi,
                                    epsabs=0.0, epsrel=1e-13)
        return val

    grid = k * np.linspace(0.0, 1.0, 33)[1:]
    sup = max(window(t, 0.0, t) for t in grid)
    small = tuple(float(x) for x in 10.0 ** np.arange(-2, -9, -1) * k)
    vals = tuple(window(t, 0.0, t) for t in small)
    shifted = tuple(window(t, -shift, -shift + t) for t in small)
    return MajorantReport(
        bound=float(bound),
        horizon=float(k),
        sup_integral=sup,
        expected_sup=2.0 * math.sqrt(k) * c,
        small_times=small,
        small_integrals=vals,
        small_slope=_loglog_slope(small, vals),
        shifted_integrals=shifted,
        shifted_slope=_loglog_slope(small, shifted),
    )
