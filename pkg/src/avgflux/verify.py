"""Cross-validation checks tying the numerical, series and Adomian paths together.

Every check returns a :class:`Check` with the measured value and the
threshold it was held to, so reports are machine readable.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import closedform as cf
from .field import pde_residual, reconstruct, residual_nodes
from .mesh import build_graded, build_spatial, default_half_width
from .ndim import TransverseProblem, solve_transverse
from .specfun import (
    INVERSE_SQRT,
    PLUS_SQRT,
    arcsine_discrepancy,
    moment_by_quadrature,
    moment_sqrt,
    moment_sqrt_inv,
)
from .volterra1d import (
    LinearSource,
    ProblemSpec1D,
    build_weights,
    kernel_majorant_check,
    solve_flux,
)

LAPLACE_POINTS = (0.5, 1.0, 4.0, 9.0)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class VerifySettings:
    h0: float = 1.0
    lam: float = 1.0
    horizon: float = 1.0
    count: int = 1024
    grading: float = 2.0
    x_count: int = 256
    y_count: int = 32
    y_steps: int = 128
    tolerance: float = 1e-3


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_weights(s: VerifySettings) -> Check:
    mesh = build_graded(s.horizon, min(s.count, 256), s.grading)
    t = mesh.nodes[1:]
    worst = 0.0
    for kind, moment in ((INVERSE_SQRT, moment_sqrt_inv), (PLUS_SQRT, moment_sqrt)):
        W = build_weights(mesh, kind).weights[1:]
        for p2, phi in ((0, np.ones_like(mesh.nodes)), (2, mesh.nodes)):
            exact = np.array([moment(p2, x) for x in t])
            worst = max(worst, float(np.max(np.abs(W @ phi - exact) / np.abs(exact))))
    return Check("weights_exactness", worst <= 1e-13, worst, 1e-13)


def check_adomian(s: VerifySettings) -> Check:
    order = 8
    total = cf.sum_series(cf.adomian_terms(s.h0, s.lam, 2 * order + 2))
    ok = total.terms == cf.series_W(s.h0, s.lam, order).terms
    return Check("adomian_vs_series", ok, 0.0 if ok else 1.0, 0.0, f"order {order}, exact rational compare")


def check_laplace(s: VerifySettings) -> list[Check]:
    form = cf.LaplaceClosedForm(s.h0, s.lam)
    scale = max(abs(s.h0), 1e-300)
    ode = max(abs(cf.ode_residual(form, x)) / (scale * x**-1.5) for x in LAPLACE_POINTS)
    series = cf.series_W(s.h0, s.lam, 20)
    # absolute floor keeps h0 = 0 meaningful
    tr = max(abs(cf.laplace_of_series(series, x) - form.Q(x)) / max(abs(form.Q(x)), 1e-300)
             if form.Q(x) != 0 else abs(cf.laplace_of_series(series, x))
             for x in LAPLACE_POINTS)
    return [
        Check("laplace_ode_residual", ode <= 1e-12, ode, 1e-12),
        Check("laplace_series_transform", tr <= 1e-10, tr, 1e-10),
    ]


def _series_error(s: VerifySettings, count: int) -> float:
    mesh = build_graded(s.horizon, count, s.grading)
    sol = solve_flux(ProblemSpec1D.linear(s.h0, s.lam, s.horizon), mesh)
    keep = mesh.times >= 0.1 * s.horizon
    ref = cf.evaluate_W(s.h0, s.lam, mesh.times[keep])
    return float(np.max(np.abs(sol.w[keep] - ref)) / max(np.max(np.abs(ref)), 1e-300))


def check_convergence(s: VerifySettings) -> list[Check]:
    err = _series_error(s, s.count)
    out = [Check("series_agreement", err <= s.tolerance, err, s.tolerance,
                 f"N={s.count}, normwise relative error on [T/10, T]")]
    if s.lam != 0:
        coarse = _series_error(s, max(s.count // 2, 2))
        ratio = coarse / err if err > 0 else math.inf
        out.append(Check("convergence_ratio", ratio >= 2.5, ratio, 2.5, f"N={s.count // 2} -> {s.count}"))
    return out


def check_trivial(s: VerifySettings) -> Check:
    mesh = build_graded(s.horizon, min(s.count, 256), s.grading)
    sol = solve_flux(ProblemSpec1D.linear(s.h0, 0.0, s.horizon), mesh)
    t = mesh.times
    v0 = s.h0 / np.sqrt(np.pi * t)
    err = max(float(np.max(np.abs(sol.v - v0) / np.abs(v0))), float(np.max(np.abs(sol.w - 2 * v0) / np.abs(2 * v0))))
    return Check("zero_source_limit", err <= 1e-12, err, 1e-12)


def check_pde(s: VerifySettings) -> Check:
    spec = ProblemSpec1D.linear(s.h0, s.lam, s.horizon)
    mesh = build_graded(s.horizon, s.count, s.grading)
    sol = solve_flux(spec, mesh)
    grid = build_spatial(default_half_width(s.horizon), s.x_count)
    _, needed = residual_nodes(mesh)
    res = pde_residual(reconstruct(spec, sol, grid, needed), spec)
    return Check("pde_residual", res <= 5e-3, res, 5e-3, f"M={s.x_count}, N={s.count}")


def check_reduction(s: VerifySettings) -> Check:
    mesh = build_graded(s.horizon, s.y_steps, s.grading)
    grid = build_spatial(default_half_width(s.horizon), s.y_count, symmetric=True)
    two = solve_transverse(TransverseProblem(grid, mesh, s.h0, LinearSource(s.lam)))
    one = solve_flux(ProblemSpec1D.linear(s.h0, s.lam, s.horizon), mesh)
    err = float(np.max(np.abs(two.averages - one.w[:, None])))
    return Check("dimensional_reduction", err <= 1e-3, err, 1e-3, f"M={s.y_count}, N={s.y_steps}")


def check_moments() -> list[Check]:
    worst = 0.0
    for p2 in range(0, 11):
        for t in (0.1, 1.0, 7.0):
            worst = max(worst, _rel(moment_sqrt_inv(p2, t), moment_by_quadrature(p2, t, INVERSE_SQRT)))
            worst = max(worst, _rel(moment_sqrt(p2, t), moment_by_quadrature(p2, t, PLUS_SQRT)))
    arc = arcsine_discrepancy()
    return [
        Check("moment_oracle", worst <= 1e-11, worst, 1e-11),
        Check("arcsine_value", arc.flagged and _rel(arc.oracle, math.pi) <= 1e-11, arc.oracle, math.pi,
              f"printed value {arc.printed:.17g} flagged"),
    ]


def check_majorant() -> list[Check]:
    out = []
    for k in (1.0, 4.0):
        rep = kernel_majorant_check(1.0, k)
        err = abs(rep.sup_integral - rep.expected_sup)
        out.append(Check(f"majorant_sup_k{k:g}", err <= 1e-10, err, 1e-10))
    rep = kernel_majorant_check(1.0, 1.0)
    dev = abs(rep.small_slope - 0.5)
    out.append(Check("majorant_small_t_slope", dev <= 0.05, rep.small_slope, 0.5, "tolerance 0.05"))
    return out


def run_all(s: VerifySettings) -> list[Check]:
    checks = [check_weights(s), check_adomian(s)]
    checks += check_laplace(s)
    checks += check_convergence(s)
    checks.append(check_trivial(s))
    checks.append(check_pde(s))
    checks.append(check_reduction(s))
    checks += check_moments()
    checks += check_majorant()
    return checks
