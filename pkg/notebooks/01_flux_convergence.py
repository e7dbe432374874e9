"""
Boundary flux driven by its own running average
===============================================

Solve for the flux V and the average W with product integration on a
graded mesh, then watch the error against the exact series shrink as the
mesh is refined.
"""

# %%
import numpy as np

from avgflux import ProblemSpec1D, build_graded, evaluate_W, solve_flux

# %% [markdown]
# With the linear source F(W) = lam * W and constant initial temperature h0
# the average flux has an exact half-integer power series.  Without a source
# W is 2 h0 / sqrt(pi t).

# %%
mesh = build_graded(1.0, 256, 2.0)
sol = solve_flux(ProblemSpec1D.linear(1.0, 0.0), mesh)
print("zero source, max |W sqrt(pi t)/2 - 1|:", np.max(np.abs(sol.w * np.sqrt(np.pi * sol.times) / 2 - 1)))

# %% [markdown]
# Errors on [0.1, 1] relative to max|W|.  For lam = 2 the average changes
# sign, so a pointwise relative error would be dominated by the root.

# %%
for lam in (0.5, 1.0, 2.0):
    spec = ProblemSpec1D.linear(1.0, lam)
    prev = None
    for N in (128, 256, 512, 1024):
        mesh = build_graded(1.0, N, 2.0)
        sol = solve_flux(spec, mesh)
        keep = mesh.times >= 0.1
        ref = evaluate_W(1.0, lam, mesh.times[keep])
        err = np.max(np.abs(sol.w[keep] - ref)) / np.max(np.abs(ref))
        ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
        print(f"lam={lam:<4} N={N:<5} error {err:.3e}{ratio}")
        prev = err

# %% [markdown]
# A nonlinear source works the same way; only the exact reference is gone.

# %%
spec = ProblemSpec1D(1.0, np.tanh, 1.0, 1.0)
for N in (256, 512, 1024):
    sol = solve_flux(spec, build_graded(1.0, N, 2.0))
    print(f"F = tanh, N={N:<5} W(1) = {sol.w[-1]:.10f}")
