"""
Exact series, Adomian terms and the Laplace transform
=====================================================

All coefficients below are exact rationals, optionally divided by sqrt(pi).
"""

# %%
from avgflux.closedform import (
    LaplaceClosedForm,
    adomian_terms,
    flux_discrepancy_note,
    laplace_of_series,
    ode_residual,
    series_W,
    sum_series,
    to_table,
)

# %% [markdown]
# The series for W, truncated after order 3 (powers up to t^3).

# %%
print(to_table(series_W(1, 1, 3)))

# %% [markdown]
# Each Adomian term fills one half-integer power, so 2k + 2 terms
# reproduce the order-k series exactly.

# %%
terms = adomian_terms(1, 1, 18)
print("18 terms equal the order-8 series:", sum_series(terms).terms == series_W(1, 1, 8).terms)
for n, term in enumerate(terms[:5]):
    print(n, to_table(term).strip())

# %% [markdown]
# The flux series, compared with the constant term of the printed expansion.

# %%
print(flux_discrepancy_note(1, 1))

# %% [markdown]
# The transformed average satisfies a first-order ODE in s; the series,
# transformed term by term, lands on the same closed form.

# %%
form = LaplaceClosedForm(1.0, 1.0)
series = series_W(1, 1, 20)
for s in (0.5, 1.0, 4.0, 9.0):
    print(f"s={s:<4} Q={form.Q(s):.15f} series={laplace_of_series(series, s):.15f} ode={ode_residual(form, s):.1e}")
