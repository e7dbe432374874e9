"""Exact series for the linear problem with constant initial temperature.

Everything here works on :class:`HalfPowerSeries`, a finite sum of
monomials ``c_p t^p`` with ``p`` a multiple of one half and every
coefficient of the form ``q * pi^(k/2)``, ``q`` rational.  ``h0`` and
``lam`` enter as exact :class:`fractions.Fraction` values (a float is
converted exactly), so the Adomian recurrence and the Laplace series can be
compared coefficient by coefficient without rounding.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exceptions import DomainError, SeriesTruncationError
from .specfun import (
    ARCSINE_INTEGRAL,
    PRINTED_ARCSINE_INTEGRAL,
    double_factorial,
    sqrt_inv_moment_exact,
    sqrt_moment_exact,
)

SERIES_RTOL = 1e-8


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        raise DomainError(f"non-finite parameter {x!r}")
    return Fraction(x)


@dataclass(frozen=True)
class Coefficient:
    """``q * pi^(pi_half_power / 2)``."""

    q: Fraction
    pi_half_power: int = 0

    @property
    def over_sqrt_pi(self) -> bool:
        return self.pi_half_power == -1

    def __float__(self) -> float:
        return float(self.q) * math.pi ** (self.pi_half_power / 2)

    def __mul__(self, other: Coefficient) -> Coefficient:
        return Coefficient(self.q * other.q, self.pi_half_power + other.pi_half_power)

    def scaled(self, q) -> Coefficient:
        return Coefficient(self.q * _exact(q), self.pi_half_power)


@dataclass(frozen=True)
class HalfPowerSeries:
    """``sum_p c_p t^(p2/2)`` keyed by the integer ``p2``.

    ``truncation_order`` is ``None`` for a finite expression and the order
    ``k`` for a truncation of an entire series.
    """

    terms: Mapping[int, Coefficient] = field(default_factory=dict)
    truncation_order: int | None = None

    def __post_init__(self) -> None:
        terms = {p2: c for p2, c in sorted(self.terms.items()) if c.q != 0}
        if terms and min(terms) < -1:
            raise DomainError("exponents below -1/2 are outside the solution family")
        object.__setattr__(self, "terms", terms)

    def __add__(self, other: HalfPowerSeries) -> HalfPowerSeries:
        out = dict(self.terms)
        for p2, c in other.terms.items():
            if p2 in out:
                if out[p2].pi_half_power != c.pi_half_power:
                    raise DomainError(f"cannot add mixed pi powers at exponent {p2}/2")
                out[p2] = Coefficient(out[p2].q + c.q, c.pi_half_power)
            else:
                out[p2] = c
        orders = [o for o in (self.truncation_order, other.truncation_order) if o is not None]
        return HalfPowerSeries(out, min(orders) if orders else None)

    def __neg__(self) -> HalfPowerSeries:
        return self.scale(-1)

    def __sub__(self, other: HalfPowerSeries) -> HalfPowerSeries:
        return self + (-other)

    def scale(self, q) -> HalfPowerSeries:
        q = _exact(q)
        return HalfPowerSeries({p: c.scaled(q) for p, c in self.terms.items()}, self.truncation_order)

    def shift(self, half_steps: int) -> HalfPowerSeries:
        """Multiply by ``t^(half_steps / 2)``."""
        return HalfPowerSeries({p + half_steps: c for p, c in self.terms.items()}, self.truncation_order)

    def coefficient(self, p2: int) -> Coefficient:
        return self.terms.get(p2, Coefficient(Fraction(0)))

    def exponents(self) -> list[int]:
        return list(self.terms)

    def truncate(self, max_p2: int) -> HalfPowerSeries:
        return HalfPowerSeries({p: c for p, c in self.terms.items() if p <= max_p2}, self.truncation_order)

    def derivative_of_t_times(self) -> HalfPowerSeries:
        """``d/dt [t * S(t)]``, term by term."""
        return HalfPowerSeries(
            {p: c.scaled(Fraction(p + 2, 2)) for p, c in self.terms.items()}, self.truncation_order
        )

    def __len__(self) -> int:
        return len(self.terms)


def series_W(h0, lam, order: int) -> HalfPowerSeries:
    """Laplace-series solution for the average flux, both sums to index ``order``.

    ::

        W(t) = 2 h0 / sqrt(pi t) * sum_n (4 lam^2 t)^n / ((2n+1) n! ((2n-1)!!)^2)
             - 2 h0 lam          * sum_n (2 lam^2 t)^n / ((n+1) (n!)^2 (2n+1)!!)
    """
    if order < 0:
        raise DomainError("order must be >= 0")
    h0, lam = _exact(h0), _exact(lam)
    terms: dict[int, Coefficient] = {}
    for n in range(order + 1):
        fn = math.factorial(n)
        a = 2 * h0 * (4 * lam**2) ** n / ((2 * n + 1) * fn * double_factorial(2 * n - 1) ** 2)
        b = -2 * h0 * lam * (2 * lam**2) ** n / ((n + 1) * fn**2 * double_factorial(2 * n + 1))
        terms[2 * n - 1] = Coefficient(a, -1)
        terms[2 * n] = Coefficient(b, 0)
    # with lam == 0 (or h0 == 0) the series terminates and nothing is truncated
    return HalfPowerSeries(terms, order if lam != 0 and h0 != 0 else None)


def _adomian_step(term: HalfPowerSeries, lam: Fraction) -> HalfPowerSeries:
    """``-(2 lam / (t sqrt(pi))) int_0^t W(tau) sqrt(t - tau) dtau`` term by term."""
    out: dict[int, Coefficient] = {}
    for p2, c in term.terms.items():
        q, k = sqrt_moment_exact(p2)
        # tau^p -> q pi^k t^(p + 3/2); divided by t -> t^(p + 1/2)
        out[p2 + 1] = Coefficient(-2 * lam * c.q * q, c.pi_half_power + 2 * k - 1)
    return HalfPowerSeries(out)


def adomian_terms(h0, lam, count: int) -> list[HalfPowerSeries]:
    """First ``count`` terms of the decomposition ``W = W_0 + W_1 + ...``.

    ``W_0 = 2 h0 / sqrt(pi t)`` and each further term applies the integral
    operator of the linear average equation to its predecessor.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    h0, lam = _exact(h0), _exact(lam)
    out = [HalfPowerSeries({-1: Coefficient(2 * h0, -1)})]
    while len(out) < count:
        out.append(_adomian_step(out[-1], lam))
    return out


def adomian_closed_form(h0, lam, n: int) -> HalfPowerSeries:
    """``W_n`` from the even/odd closed forms obtained by induction."""
    h0, lam = _exact(h0), _exact(lam)
    m, odd = divmod(n, 2)
    if odd:
        c = -2 * lam * h0 * (2 * lam**2) ** m / ((m + 1) * math.factorial(m) ** 2 * double_factorial(2 * m + 1))
        return HalfPowerSeries({2 * m: Coefficient(c, 0)})
    c = 2 * h0 * (4 * lam**2) ** m / ((2 * m + 1) * math.factorial(m) * double_factorial(2 * m - 1) ** 2)
    return HalfPowerSeries({2 * m - 1: Coefficient(c, -1)})


def sum_series(parts: Iterable[HalfPowerSeries]) -> HalfPowerSeries:
    total = HalfPowerSeries()
    for part in parts:
        total = total + part
    return total


def flux_series(h0, lam, order: int) -> HalfPowerSeries:
    """Boundary flux ``h0/sqrt(pi t) - (lam/sqrt(pi)) int_0^t W(tau)/sqrt(t - tau) dtau``.

    Integrated term by term from :func:`series_W`; the ``t^(-1/2)`` term of
    ``W`` uses :data:`ARCSINE_INTEGRAL` (pi).
    """
    h0, lam = _exact(h0), _exact(lam)
    W = series_W(h0, lam, order)
    out: dict[int, Coefficient] = {-1: Coefficient(h0, -1)}
    for p2, c in W.terms.items():
        if p2 == -1:
            q, k = Fraction(1), 2  # pi = pi^(2/2)
        else:
            q, k = sqrt_inv_moment_exact(p2)
            k *= 2
        coeff = Coefficient(-lam * c.q * q, c.pi_half_power + k - 1)
        if p2 + 1 in out:
            out[p2 + 1] = Coefficient(out[p2 + 1].q + coeff.q, coeff.pi_half_power)
        else:
            out[p2 + 1] = coeff
    return HalfPowerSeries(out, W.truncation_order)


@dataclass(frozen=True)
class SeriesValue:
    value: float
    truncation: float


def _needed_order(series: HalfPowerSeries, t: float, total: float, rtol: float) -> int:
    """Extrapolate the tail with the ratio of the last two same-parity terms."""
    order = series.truncation_order or 0
    mags = {p: abs(float(c)) * t ** (p / 2) for p, c in series.terms.items()}
    need = order
    for parity in (0, 1):
        ps = [p for p in mags if p % 2 == parity]
        if len(ps) < 2:
            continue
        last, before = mags[ps[-1]], mags[ps[-2]]
        if before == 0 or last == 0:
            continue
        ratio = last / before
        extra = 1
        mag = last
        while mag > rtol * abs(total) and extra < 10_000:
            mag *= min(ratio, 0.999)
            extra += 1
        need = max(need, order + extra)
    return need


def evaluate_series(series: HalfPowerSeries, t: float, rtol: float = SERIES_RTOL) -> SeriesValue:
    """Sum ``series`` at ``t`` in ascending exponent order.

    The reported truncation estimate is the largest magnitude among the last
    term of each parity family (integer and half-integer powers).  For a
    truncated entire series the evaluation is refused when that estimate
    exceeds ``rtol * |sum|``.
    """
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"t must be positive, got {t!r}")
    if not series.terms:
        return SeriesValue(0.0, 0.0)
    total = 0.0
    for p2, c in series.terms.items():
        total += float(c) * t ** (p2 / 2)
    ps = list(series.terms)
    tails = [p for p in (max((p for p in ps if p % 2 == 0), default=None),
                         max((p for p in ps if p % 2 != 0), default=None)) if p is not None]
    trunc = max(abs(float(series.terms[p])) * t ** (p / 2) for p in tails)
    if series.truncation_order is not None and trunc > rtol * abs(total):
        need = _needed_order(series, t, total, rtol)
        raise SeriesTruncationError(
            f"truncation estimate {trunc:.3g} exceeds {rtol:g} x |sum| at t={t}; "
            f"raise the order to about {need}",
            need,
        )
    return SeriesValue(total, trunc)


def required_order(h0, lam, t: float, rtol: float = SERIES_RTOL, start: int = 8) -> int:
    order = start
    while True:
        try:
            evaluate_series(series_W(h0, lam, order), t, rtol)
            return order
        except SeriesTruncationError as exc:
            order = max(order + 1, exc.needed_order)


def evaluate_W(h0, lam, t, rtol: float = 1e-13) -> np.ndarray:
    """Average flux from the Laplace series, with the order raised as needed."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    order = required_order(h0, lam, float(ts.max()), rtol)
    S = series_W(h0, lam, order)
    out = np.array([evaluate_series(S, x, rtol=np.inf).value for x in ts])
    return out if np.ndim(t) else out[0]


# {{{ Laplace domain


@dataclass(frozen=True)
class LaplaceClosedForm:
    """``Q(s) = (h0/lam) (1 - exp(-2 lam / sqrt(s)))``, the transform of ``W``."""

    h0: float
    lam: float

    def Q(self, s: float) -> float:
        s = _check_s(s)
        if self.lam == 0:
            return 2.0 * self.h0 / math.sqrt(s)
        return -self.h0 / self.lam * math.expm1(-2.0 * self.lam / math.sqrt(s))

    def dQ(self, s: float) -> float:
        s = _check_s(s)
        return -self.h0 * math.exp(-2.0 * self.lam / math.sqrt(s)) * s**-1.5


def _check_s(s: float) -> float:
    s = float(s)
    if not (s > 0 and math.isfinite(s)):
        raise DomainError(f"Laplace variable must be positive, got {s!r}")
    return s


def laplace_Q(form: LaplaceClosedForm, s: float) -> float:
    return form.Q(s)


def ode_residual(form: LaplaceClosedForm, s: float) -> float:
    """``Q'(s) - lam Q(s) / s^(3/2) + h0 / s^(3/2)`` with the analytic derivative."""
    s = _check_s(s)
    return form.dQ(s) - form.lam * form.Q(s) * s**-1.5 + form.h0 * s**-1.5


def laplace_of_series(series: HalfPowerSeries, s: float) -> float:
    """Term-wise transform, ``L[t^p](s) = Gamma(p + 1) / s^(p + 1)``.

    Half-integer powers use ``Gamma(n + 1/2) = (2n - 1)!! sqrt(pi) / 2^n``.
    """
    s = _check_s(s)
    total = 0.0
    for p2, c in series.terms.items():
        if p2 % 2 == 0:
            n = p2 // 2
            g = Coefficient(Fraction(math.factorial(n)), 0)
        else:
            n = (p2 + 1) // 2
            g = Coefficient(Fraction(double_factorial(2 * n - 1), 2**n), 1)
        total += float(c * g) * s ** (-(p2 + 2) / 2)
    return total


def laplace_taylor_coefficients(h0, lam, count: int) -> dict[int, Fraction]:
    """Coefficients ``a_m`` of ``Q(s) = sum_{m>=1} a_m s^(-m/2)`` from the exponential series."""
    h0, lam = _exact(h0), _exact(lam)
    return {m: h0 * (-1) ** (m + 1) * 2**m * lam ** (m - 1) / math.factorial(m) for m in range(1, count + 1)}


def laplace_coefficients_of(series: HalfPowerSeries) -> dict[int, Coefficient]:
    """Coefficients of ``s^(-m/2)`` produced by :func:`laplace_of_series`, kept exact."""
    out = {}
    for p2, c in series.terms.items():
        if p2 % 2 == 0:
            g = Coefficient(Fraction(math.factorial(p2 // 2)), 0)
        else:
            n = (p2 + 1) // 2
            g = Coefficient(Fraction(double_factorial(2 * n - 1), 2**n), 1)
        out[p2 + 2] = c * g
    return out


# }}}


# {{{ comparison against the printed first terms


def printed_flux_terms(h0, lam) -> HalfPowerSeries:
    """First terms of the boundary-flux expansion as printed with the derivation.

    The constant term reads ``-lam/4 h0``; the other six terms agree with
    :func:`flux_series`.
    """
    h0, lam = _exact(h0), _exact(lam)
    return HalfPowerSeries({
        -1: Coefficient(h0, -1),
        0: Coefficient(-lam * h0 / 4, 0),
        1: Coefficient(4 * lam**2 * h0, -1),
        2: Coefficient(Fraction(-4, 3) * lam**3 * h0, 0),
        3: Coefficient(Fraction(8, 9) * lam**4 * h0, -1),
        4: Coefficient(Fraction(-2, 15) * lam**5 * h0, 0),
        5: Coefficient(Fraction(32, 675) * lam**6 * h0, -1),
    })


def printed_average_terms(h0, lam) -> HalfPowerSeries:
    """First six terms of the average-flux expansion as printed."""
    h0, lam = _exact(h0), _exact(lam)
    return HalfPowerSeries({
        -1: Coefficient(2 * h0, -1),
        0: Coefficient(-2 * lam * h0, 0),
        1: Coefficient(Fraction(8, 3) * lam**2 * h0, -1),
        2: Coefficient(Fraction(-2, 3) * lam**3 * h0, 0),
        3: Coefficient(Fraction(16, 45) * lam**4 * h0, -1),
        4: Coefficient(Fraction(-2, 45) * lam**5 * h0, 0),
    })


@dataclass(frozen=True)
class TermComparison:
    p2: int
    computed: Coefficient
    printed: Coefficient
    agrees: bool


def compare_printed(computed: HalfPowerSeries, printed: HalfPowerSeries) -> list[TermComparison]:
    return [
        TermComparison(p2, computed.coefficient(p2), c, computed.coefficient(p2) == c)
        for p2, c in printed.terms.items()
    ]


def flux_discrepancy_note(h0=1, lam=1) -> str:
    rows = compare_printed(flux_series(h0, lam, 6), printed_flux_terms(h0, lam))
    bad = [r for r in rows if not r.agrees]
    if not bad:
        return "flux expansion: all printed terms reproduced"
    parts = [
        f"t^({r.p2}/2): computed {float(r.computed):.17g}, printed {float(r.printed):.17g}"
        for r in bad
    ]
    return (
        "flux expansion differs from the printed terms at " + "; ".join(parts)
        + f". The printed constant follows from int_0^t dtau/sqrt(tau(t-tau)) = "
        f"{PRINTED_ARCSINE_INTEGRAL:.6g}; quadrature gives {ARCSINE_INTEGRAL:.6g}."
    )


# }}}


# {{{ plain-text table


def to_table(series: HalfPowerSeries) -> str:
    """One line per term: ``exponent_numerator/2, rational_coefficient, sqrt_pi_flag``."""
    lines = []
    for p2, c in series.terms.items():
        if c.pi_half_power not in (0, -1):
            raise DomainError("only q and q/sqrt(pi) coefficients can be serialized")
        lines.append(f"{p2}/2, {c.q}, {int(c.over_sqrt_pi)}")
    return "\n".join(lines) + ("\n" if lines else "")


def from_table(text: str, truncation_order: int | None = None) -> HalfPowerSeries:
    terms = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        exp, q, flag = (part.strip() for part in line.split(","))
        num, den = exp.split("/")
        if den != "2":
            raise DomainError(f"bad exponent field {exp!r}")
        terms[int(num)] = Coefficient(Fraction(q), -1 if int(flag) else 0)
    return HalfPowerSeries(terms, truncation_order)


# }}}
