"""Temperature reconstruction from the boundary flux, and its PDE residual.

With the flux known, the temperature is an explicit time integral

    u(x, t) = u0(x, t) - int_0^t erf(x / (2 sqrt(t - tau))) F(W(tau)) dtau,

where ``u0`` is the free solution with the same initial data.  The
integrand is singular at ``tau = 0`` (through ``W``) and has a boundary
layer at ``tau = t`` (through ``erf`` when ``x`` is small), so the time
integral is split at ``t/2``: on the left ``erf * sqrt(tau) F(W)`` is
treated like the regularized flux integrals, on the right ``F(W)`` is
piecewise linear and integrated against ``erf`` exactly.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erf, erfc

from .exceptions import DomainError, MeshError
from .mesh import GradedMesh, SpatialGrid
from .volterra1d import UNIT, FluxSolution, ProblemSpec1D, weight_row

SQRT_PI = math.sqrt(math.pi)


def kernel(x: float, t: float, xi: float, tau: float) -> float:
    """Dirichlet heat kernel on the half line (direct source minus its image)."""
    dt = t - tau
    if not dt > 0:
        raise DomainError(f"kernel needs t > tau, got t={t!r}, tau={tau!r}")
    four = 4.0 * dt
    return (math.exp(-((x - xi) ** 2) / four) - math.exp(-((x + xi) ** 2) / four)) / (2.0 * math.sqrt(math.pi * dt))


@dataclass(frozen=True)
class KernelIntegralCheck:
    x: float
    elapsed: float
    quadrature: float
    erf_value: float

    @property
    def error(self) -> float:
        return abs(self.quadrature - self.erf_value)


@dataclass(frozen=True)
class KernelIntegralReport:
    checks: tuple[KernelIntegralCheck, ...]
    tol: float

    @property
    def max_error(self) -> float:
        return max(c.error for c in self.checks)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol


def erf_kernel_integral(
    xs=(0.0, 0.1, 0.5, 1.0, 2.0, 5.0), elapsed=(1e-3, 0.1, 0.25, 1.0, 4.0), tol: float = 1e-10
) -> KernelIntegralReport:
    """Check ``int_0^inf G(x, t, xi, tau) dxi = erf(x / (2 sqrt(t - tau)))`` by quadrature.

    The integration variable is the spatial one, over the whole half line.
    """
    checks = []
    for x in xs:
        for d in elapsed:
            width = 40.0 * math.sqrt(d)
            pts = [p for p in (x,) if 0 < p < x + width]
            val, _ = integrate.quad(
                lambda xi: kernel(x, d, xi, 0.0), 0.0, x + width,
                points=pts or None, epsabs=1e-14, epsrel=1e-13, limit=400,
            )
            checks.append(KernelIntegralCheck(float(x), float(d), val, math.erf(x / (2 * math.sqrt(d)))))
    return KernelIntegralReport(tuple(checks), tol)


def initial_field(spec: ProblemSpec1D, x, t: float):
    """Free solution ``u0(x, t) = int_0^inf G(x, t, xi, 0) h(xi) dxi``."""
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"t must be positive, got {t!r}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("x must be >= 0")
    if spec.h0 is not None:
        return spec.h0 * erf(xa / (2.0 * math.sqrt(t)))

    h = spec.initial
    width = 40.0 * math.sqrt(t)

    def one(xv: float) -> float:
        if xv == 0.0:
            return 0.0
        val, _ = integrate.quad(
            lambda xi: kernel(xv, t, xi, 0.0) * h(xi), 0.0, xv + width,
            points=[xv], epsabs=1e-12, epsrel=1e-10, limit=400,
        )
        return val

    out = np.vectorize(one, otypes=[float])(xa)
    return out if out.ndim else float(out)


# {{{ reconstruction


@dataclass(frozen=True, eq=False)
class TemperatureField:
    """``u(x_i, t_j)`` on a spatial grid for a subset of mesh nodes.

    ``time_indices`` are mesh node indices (``>= 1``); ``values[m]`` is the
    profile at ``mesh.nodes[time_indices[m]]``.  ``source_trace`` holds
    ``F(W(t_j))`` at every node ``1..N``.
    """

    x_grid: SpatialGrid
    mesh: GradedMesh
    time_indices: np.ndarray
    values: np.ndarray
    source_trace: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.mesh.nodes[self.time_indices]

    def profile(self, j: int) -> np.ndarray:
        """Profile at mesh node ``j``."""
        pos = np.searchsorted(self.time_indices, j)
        if pos >= len(self.time_indices) or self.time_indices[pos] != j:
            raise KeyError(f"node {j} was not reconstructed")
        return self.values[pos]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,x,u\n")
        for t, row in zip(self.times, self.values):
            for x, u in zip(self.x_grid.nodes, row):
                buf.write(f"{t:.17g},{x:.17g},{u:.17g}\n")
        return buf.getvalue()


def _erf_moments(x: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``int_0^s erf(x/(2 sqrt(r))) dr`` and ``int_0^s r erf(x/(2 sqrt(r))) dr``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        rs = np.sqrt(s)
        z = np.where(s > 0, x / (2.0 * rs), np.inf)
        ec = erfc(z)
        ex = np.exp(-z * z) / SQRT_PI
        c0 = (s + 0.5 * x * x) * ec - x * rs * ex
        c1 = (0.5 * s * s - x**4 / 24.0) * ec + (x**3 * rs - 2.0 * x * s * rs) * ex / 12.0
        a0 = np.where(s > 0, s - c0, 0.0)
        a1 = np.where(s > 0, 0.5 * s * s - c1, 0.0)
    return a0, a1


def _source_integral(x: np.ndarray, nodes: np.ndarray, j: int, src: np.ndarray) -> np.ndarray:
    """``int_0^{t_j} erf(x/(2 sqrt(t_j - tau))) F(W(tau)) dtau`` for all ``x``.

    ``src[k]`` is ``F(W(t_k))`` for ``k = 1..N`` (``src[0]`` unused).
    """
    t = nodes[j]
    g = np.sqrt(nodes[: j + 1]) * src[: j + 1]
    if j == 1:
        # single interval: g frozen, erf layer resolved by Gauss-Legendre in sqrt(tau)
        xq, wq = np.polynomial.legendre.leggauss(64)
        s1 = math.sqrt(t)
        sig = 0.5 * s1 * (xq + 1.0)
        E = erf(x[:, None] / (2.0 * np.sqrt(t - sig * sig)))
        return g[1] * s1 * (E @ wq)

    # split point: last node with t_k <= t/2
    ks = int(np.searchsorted(nodes[: j + 1], 0.5 * t, side="right")) - 1
    ks = max(ks, 1)
    total = np.zeros_like(x)
    row = weight_row(nodes, ks, UNIT, True)
    for k in range(1, ks + 1):
        total += row[k] * g[k] * erf(x / (2.0 * math.sqrt(t - nodes[k])))

    if ks < j:
        lo, hi = nodes[ks:j], nodes[ks + 1 : j + 1]
        h = hi - lo
        a, b = t - hi, t - lo
        A0b, A1b = _erf_moments(x[:, None], b[None, :])
        A0a, A1a = _erf_moments(x[:, None], a[None, :])
        i0, i1 = A0b - A0a, A1b - A1a
        up = (b[None, :] * i0 - i1) / h[None, :]
        total += (i0 - up) @ src[ks:j] + up @ src[ks + 1 : j + 1]
    return total


def reconstruct(
    spec: ProblemSpec1D,
    flux: FluxSolution,
    x_grid: SpatialGrid,
    time_indices=None,
) -> TemperatureField:
    """Temperature on ``x_grid`` at the requested mesh nodes (default: all)."""
    mesh = flux.mesh
    if x_grid.symmetric:
        raise MeshError("the temperature lives on x >= 0; pass a one-sided grid")
    nodes = mesh.nodes
    if time_indices is None:
        idx = np.arange(1, mesh.count + 1)
    else:
        idx = np.unique(np.asarray(time_indices, dtype=int))
        if idx.size == 0 or idx[0] < 1 or idx[-1] > mesh.count:
            raise MeshError("time indices must lie in 1..N")
    src = np.concatenate([[0.0], np.asarray(flux.source, dtype=float)])
    if src.size != mesh.count + 1:
        raise MeshError("flux solution does not match its mesh")
    x = np.asarray(x_grid.nodes, dtype=float)
    vals = np.empty((idx.size, x.size))
    for m, j in enumerate(idx):
        u = initial_field(spec, x, nodes[j]) - _source_integral(x, nodes, j, src)
        u[x == 0.0] = 0.0
        vals[m] = u
    return TemperatureField(x_grid, mesh, idx, vals, src[1:])


# }}}


# {{{ PDE residual


def residual_nodes(mesh: GradedMesh, samples: int = 8, t_min: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Centre nodes for the residual check and every node the stencils touch.

    Centres are the nodes closest to ``samples`` evenly spaced times in
    ``[t_min, T)``; on a refined mesh the same physical times are picked.
    """
    nodes = mesh.nodes
    t_min = 0.1 * mesh.horizon if t_min is None else t_min
    targets = np.linspace(t_min, 0.9 * mesh.horizon, samples)
    centres = np.unique([int(np.argmin(np.abs(nodes - tt))) for tt in targets])
    centres = [c for c in centres if 2 <= c <= mesh.count - 2]
    stencils = [_stencil_nodes(nodes, c) for c in centres]
    keep = [s is not None for s in stencils]
    centres = np.array([c for c, k in zip(centres, keep) if k], dtype=int)
    if centres.size == 0:
        return centres, centres
    needed = np.unique(np.concatenate([s for s, k in zip(stencils, keep) if k]))
    return centres, needed


def _interp_index(nodes: np.ndarray, tau: float) -> int:
    """Middle node of the three used to interpolate at ``tau``."""
    return int(np.clip(np.argmin(np.abs(nodes - tau)), 1, len(nodes) - 2))


def _stencil_nodes(nodes: np.ndarray, j: int) -> np.ndarray | None:
    """Mesh nodes the time derivative at ``j`` reads, or ``None`` if it leaves ``(0, T]``."""
    d = 0.5 * (nodes[j + 1] - nodes[j - 1])
    if nodes[j] - 2 * d <= 0 or nodes[j] + 2 * d > nodes[-1]:
        return None
    mids = [_interp_index(nodes, nodes[j] + m * d) for m in (-2, -1, 1, 2)]
    out = np.unique(np.concatenate([[j - 2, j - 1, j, j + 1, j + 2]] + [[i - 1, i, i + 1] for i in mids]))
    return None if out[0] < 1 else out


def _quadratic_at(field: TemperatureField, tau: float) -> np.ndarray:
    nodes = field.mesh.nodes
    i = _interp_index(nodes, tau)
    ts = nodes[i - 1 : i + 2]
    us = [field.profile(k) for k in (i - 1, i, i + 1)]
    out = np.zeros_like(us[0])
    for a in range(3):
        la = 1.0
        for b in range(3):
            if b != a:
                la *= (tau - ts[b]) / (ts[a] - ts[b])
        out += la * us[a]
    return out


def pde_residual(field: TemperatureField, spec: ProblemSpec1D, centres=None) -> float:
    """``max |u_t - u_xx + F(W(t))| / max |u|`` over interior sample points.

    ``u_xx`` is the fourth-order centred five-point difference on the
    uniform x grid (the three-point stencil's ``dx^2`` error dominates
    everything else at the default resolutions).  The
    time mesh is graded, so ``u_t`` uses five uniform points ``t_j + m d``
    (``d`` the local mean spacing), each obtained by quadratic
    interpolation through the three nearest mesh nodes.
    """
    grid = field.x_grid
    if grid.count - 2 < 64:
        raise MeshError("residual check needs at least 64 interior x nodes")
    if centres is None:
        centres, _ = residual_nodes(field.mesh)
    centres = [int(c) for c in np.asarray(centres, dtype=int)]
    have = set(field.time_indices.tolist())
    nodes = field.mesh.nodes
    stencils = {c: _stencil_nodes(nodes, c) for c in centres if 2 <= c <= field.mesh.count - 2}
    centres = [c for c, st in stencils.items() if st is not None and have.issuperset(st.tolist())]
    if not centres:
        raise MeshError("no reconstructed node has the neighbours the time stencil needs")
    dx = grid.spacing
    worst = 0.0
    for j in centres:
        d = 0.5 * (nodes[j + 1] - nodes[j - 1])
        u = {m: _quadratic_at(field, nodes[j] + m * d) for m in (-2, -1, 1, 2)}
        ut = (-u[2] + 8.0 * u[1] - 8.0 * u[-1] + u[-2]) / (12.0 * d)
        prof = field.profile(j)
        uxx = (-prof[4:] + 16.0 * prof[3:-1] - 30.0 * prof[2:-2] + 16.0 * prof[1:-3] - prof[:-4]) / (12.0 * dx**2)
        r = ut[2:-2] - uxx + field.source_trace[j - 1]
        worst = max(worst, float(np.max(np.abs(r))))
    return worst / float(np.max(np.abs(field.values)))


# }}}
