"""
Temperature field from the boundary flux
========================================

Once W is known the source is a known function of time and the temperature
follows from the half-line Green's function.  A finite-difference residual
checks that the result solves the heat equation.
"""

# %%
from avgflux import (
    ProblemSpec1D,
    build_graded,
    build_spatial,
    default_half_width,
    pde_residual,
    reconstruct,
    solve_flux,
)
from avgflux.field import residual_nodes

# %%
spec = ProblemSpec1D.linear(1.0, 1.0)
mesh = build_graded(1.0, 256, 2.0)
sol = solve_flux(spec, mesh)
grid = build_spatial(default_half_width(1.0), 97)
field = reconstruct(spec, sol, grid, [64, 128, 256])

# %% [markdown]
# Profiles at three times.  The source -lam W pulls the far field below h0.

# %%
for t, row in zip(field.times, field.values):
    print(f"t={t:.4f}", " ".join(f"{u:+.4f}" for u in row[::12]))

# %% [markdown]
# The residual |u_t - u_xx + lam W| / max|u| drops as both grids refine.

# %%
for M, N in ((128, 512), (256, 1024), (511, 2048)):
    mesh = build_graded(1.0, N, 2.0)
    sol = solve_flux(spec, mesh)
    _, needed = residual_nodes(mesh)
    field = reconstruct(spec, sol, build_spatial(default_half_width(1.0), M), needed)
    print(f"M={M:<4} N={N:<5} residual {pde_residual(field, spec):.2e}")
