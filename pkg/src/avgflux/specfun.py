"""Special functions and closed-form moments of the Abel-type kernels.

Two kernel families show up in every closed-form manipulation of the
averaged-flux problem::

    int_0^t tau^p (t - tau)^(-1/2) dtau      (inverse square root)
    int_0^t tau^p (t - tau)^(+1/2) dtau      (square root)

with ``p`` a non-negative multiple of one half.  Both are Beta integrals,
but the solution series only ever needs them in the double-factorial form,
so that is what is implemented here, exactly, with rational coefficients.

Exponents are passed as ``p2 = 2 * p`` (an integer) to keep half-integer
powers exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from scipy import integrate

from .exceptions import DomainError, QuadratureFailure

#: Exact value of ``int_0^t dtau / sqrt(tau (t - tau))``, independent of t.
ARCSINE_INTEGRAL = math.pi

#: The value printed for the same integral in the source derivation of the
#: boundary-flux expansion.  Kept only so that reports can flag it.
PRINTED_ARCSINE_INTEGRAL = math.pi / 8

INVERSE_SQRT = "inverse_sqrt"
PLUS_SQRT = "plus_sqrt"
KERNEL_KINDS = (INVERSE_SQRT, PLUS_SQRT)


def erf(z: float) -> float:
    """Error function ``(2/sqrt(pi)) int_0^z exp(-X^2) dX``."""
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"erf needs a finite argument, got {z!r}")
    return math.erf(z)


def double_factorial(n: int) -> int:
    """``n!!`` for ``n >= -1`` with the convention ``(-1)!! = 0!! = 1``."""
    if n < -1:
        raise DomainError(f"double factorial undefined for n={n}")
    return math.prod(range(n, 0, -2)) if n > 0 else 1


@dataclass(frozen=True)
class DoubleFactorialTable:
    """Exact odd double factorials ``1!!, 3!!, ..., bound!!``."""

    bound: int = 41
    values: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.bound < 41 or self.bound % 2 == 0:
            raise DomainError("bound must be an odd integer >= 41")
        values = {-1: 1}
        for n in range(1, self.bound + 1, 2):
            values[n] = n * values[n - 2]
        object.__setattr__(self, "values", values)

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    def __contains__(self, n: int) -> bool:
        return n in self.values


def _check_exponent(p2: int, lowest: int) -> None:
    if not isinstance(p2, int) or isinstance(p2, bool):
        raise DomainError(f"exponent must be given as an integer 2*p, got {p2!r}")
    if p2 < lowest:
        raise DomainError(f"exponent p={p2}/2 is below the supported range")


def _check_time(t: float) -> float:
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"t must be positive and finite, got {t!r}")
    return t


def sqrt_inv_moment_exact(p2: int) -> tuple[Fraction, int]:
    """Exact ``(q, k)`` with ``int_0^t tau^p / sqrt(t - tau) = q pi^k t^(p + 1/2)``.

    ``k`` is 0 for integer ``p`` and 1 for half-integer ``p``.  The
    ``p = -1/2`` member of the family is rejected here; see
    :data:`ARCSINE_INTEGRAL`.
    """
    _check_exponent(p2, 0)
    if p2 % 2 == 0:
        n = p2 // 2
        num = math.factorial(2 * n)
        den = double_factorial(2 * n - 1) ** 2
        return Fraction(num, den) / Fraction(2 * n + 1, 2), 0
    n = (p2 + 1) // 2
    return Fraction(double_factorial(2 * n - 1) ** 2, math.factorial(2 * n)), 1


def sqrt_moment_exact(p2: int) -> tuple[Fraction, int]:
    """Exact ``(q, k)`` with ``int_0^t tau^p sqrt(t - tau) = q pi^k t^(p + 3/2)``.

    Valid for ``p >= -1/2``.
    """
    _check_exponent(p2, -1)
    if p2 % 2 == 0:
        n = p2 // 2
        return Fraction(2 ** (n + 1) * math.factorial(n), double_factorial(2 * n + 3)), 0
    n = (p2 + 1) // 2
    return Fraction(double_factorial(2 * n - 1), 2 ** (n + 1) * math.factorial(n + 1)), 1


def moment_sqrt_inv(p2: int, t: float) -> float:
    """``int_0^t tau^(p2/2) (t - tau)^(-1/2) dtau`` for ``p2 >= 0``."""
    t = _check_time(t)
    q, k = sqrt_inv_moment_exact(p2)
    return float(q) * math.pi**k * t ** ((p2 + 1) / 2)


def moment_sqrt(p2: int, t: float) -> float:
    """``int_0^t tau^(p2/2) (t - tau)^(+1/2) dtau`` for ``p2 >= -1``."""
    t = _check_time(t)
    q, k = sqrt_moment_exact(p2)
    return float(q) * math.pi**k * t ** ((p2 + 3) / 2)


def moment_by_quadrature(p2: int, t: float, kind: str, tol: float = 1e-13) -> float:
    """Adaptive-quadrature value of the same moments, used as an oracle.

    The substitution ``tau = t sin^2(theta)`` turns
    ``tau^p (t - tau)^a dtau`` into
    ``2 t^(p + a + 1) sin^(2p + 1) cos^(2a + 1) dtheta``, which is smooth on
    ``[0, pi/2]`` for every exponent the kernels need (including
    ``p = -1/2``).
    """
    t = _check_time(t)
    if kind not in KERNEL_KINDS:
        raise DomainError(f"unknown kernel kind {kind!r}")
    if p2 < -1:
        raise DomainError("oracle needs p >= -1/2")
    a2 = -1 if kind == INVERSE_SQRT else 1
    ps, pc = p2 + 1, a2 + 1

    def integrand(theta: float) -> float:
        return 2.0 * math.sin(theta) ** ps * math.cos(theta) ** pc

    val, err = integrate.quad(integrand, 0.0, math.pi / 2, epsabs=0.0, epsrel=tol, limit=200)
    if err > 10 * tol * abs(val) + 1e-300:
        raise QuadratureFailure(f"moment oracle error estimate {err:.3g} too large")
    return val * t ** ((p2 + a2) / 2 + 1)


@dataclass(frozen=True)
class ArcsineDiscrepancy:
    oracle: float
    printed: float
    expected: float
    flagged: bool


def arcsine_discrepancy(t: float = 1.0) -> ArcsineDiscrepancy:
    """Measure ``int_0^t dtau / sqrt(tau (t - tau))`` and flag the printed pi/8."""
    oracle = moment_by_quadrature(-1, t, INVERSE_SQRT)
    flagged = not math.isclose(oracle, PRINTED_ARCSINE_INTEGRAL, rel_tol=1e-6)
    return ArcsineDiscrepancy(oracle, PRINTED_ARCSINE_INTEGRAL, ARCSINE_INTEGRAL, flagged)
