import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avgflux.closedform import (
    Coefficient,
    HalfPowerSeries,
    LaplaceClosedForm,
    adomian_closed_form,
    adomian_terms,
    compare_printed,
    evaluate_series,
    evaluate_W,
    flux_discrepancy_note,
    flux_series,
    from_table,
    laplace_coefficients_of,
    laplace_of_series,
    laplace_Q,
    laplace_taylor_coefficients,
    ode_residual,
    printed_average_terms,
    printed_flux_terms,
    required_order,
    series_W,
    sum_series,
    to_table,
)
from avgflux.exceptions import DomainError, SeriesTruncationError

SQRT_PI = math.sqrt(math.pi)
S_POINTS = (0.5, 1.0, 4.0, 9.0)


def Cq(q, over_sqrt_pi=False):
    return Coefficient(Fraction(q), -1 if over_sqrt_pi else 0)


def inverse_laplace_W(h0, lam, t):
    """Independent oracle: Talbot inversion of Q(s) at 30 digits."""
    mpmath.mp.dps = 30
    Q = lambda s: h0 / lam * (1 - mpmath.exp(-2 * lam / mpmath.sqrt(s)))
    return float(mpmath.invertlaplace(Q, t, method="talbot"))


class TestSeriesW:
    @pytest.mark.parametrize("h0, lam", [(1, 1), (3, Fraction(1, 2)), (Fraction(2, 7), -2)])
    def test_leading_coefficients(self, h0, lam):
        S = series_W(h0, lam, 3)
        h0, lam = Fraction(h0), Fraction(lam)
        assert S.coefficient(-1) == Cq(2 * h0, True)
        assert S.coefficient(0) == Cq(-2 * h0 * lam)
        assert S.coefficient(1) == Cq(Fraction(8, 3) * h0 * lam**2, True)
        assert S.coefficient(4) == Cq(-2 * h0 * lam**5 / 45)

    def test_order_zero_has_two_terms(self):
        assert series_W(1, 1, 0).exponents() == [-1, 0]

    def test_lambda_zero_terminates(self):
        S = series_W(1, 0, 5)
        assert S.exponents() == [-1] and S.truncation_order is None

    def test_negative_order(self):
        with pytest.raises(DomainError):
            series_W(1, 1, -1)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_ratio_test(self, lam):
        S = series_W(1, lam, 30)
        t = 1.0
        for parity in (0, 1):
            ps = [p for p in S.exponents() if p % 2 == parity % 2 and p >= 1]
            mags = [abs(float(S.coefficient(p))) * t ** (p / 2) for p in ps]
            ratios = np.array(mags[1:]) / np.array(mags[:-1])
            n = np.arange(1, len(ratios) + 1) + 1
            # ratio of same-parity terms behaves like 4 lam^2 t / n^2 at most
            assert np.all(ratios[5:] <= 4 * lam**2 * t / n[5:])
            assert ratios[-1] < 1e-2

    @pytest.mark.parametrize("lam, t", [(1.0, 0.25), (1.0, 1.0), (0.5, 0.7), (2.0, 0.5), (2.0, 1.0)])
    def test_against_inverse_laplace(self, lam, t):
        np.testing.assert_allclose(evaluate_W(1, lam, t), inverse_laplace_W(1, lam, t), rtol=1e-10, atol=1e-13)

    def test_quarter_reference(self):
        np.testing.assert_allclose(evaluate_W(1, 1, 0.25), 0.8648649400050985, rtol=1e-13)


class TestAdomian:
    def test_first_terms(self):
        W = adomian_terms(1, 1, 5)
        assert W[0].terms == {-1: Cq(2, True)}
        assert W[1].terms == {0: Cq(-2)}
        assert W[2].terms == {1: Cq(Fraction(8, 3), True)}
        assert W[3].terms == {2: Cq(Fraction(-2, 3))}
        assert W[4].terms == {3: Cq(Fraction(16, 45), True)}

    @given(st.fractions(min_value=-5, max_value=5, max_denominator=9).filter(lambda x: x != 0),
           st.fractions(min_value=-3, max_value=3, max_denominator=9).filter(lambda x: x != 0))
    @settings(max_examples=25, deadline=None)
    def test_every_term_is_a_monomial_matching_closed_form(self, h0, lam):
        for n, term in enumerate(adomian_terms(h0, lam, 18)):
            assert len(term) == 1
            assert term.terms == adomian_closed_form(h0, lam, n).terms

    @pytest.mark.parametrize("k", range(0, 9))
    def test_sum_equals_series(self, k):
        terms = adomian_terms(1, Fraction(3, 2), 2 * k + 2)
        S = series_W(1, Fraction(3, 2), k)
        assert sum_series(terms).terms == S.terms
        # 2k + 1 terms stop one short of the t^k term
        assert sum_series(terms[:-1]).terms == S.truncate(2 * k - 1).terms

    def test_count_validated(self):
        with pytest.raises(DomainError):
            adomian_terms(1, 1, 0)


class TestFluxSeries:
    def test_coefficients(self):
        S = flux_series(2, 3, 4)
        assert S.coefficient(-1) == Cq(2, True)
        assert S.coefficient(0) == Cq(-2 * 2 * 3)
        assert S.coefficient(1) == Cq(4 * 2 * 9, True)
        assert S.coefficient(2) == Cq(Fraction(-4, 3) * 2 * 27)

    def test_lambda_zero(self):
        S = flux_series(1.5, 0, 4)
        assert S.terms == {-1: Cq(Fraction(3, 2), True)}

    @pytest.mark.parametrize("k", [1, 4, 8])
    def test_derivative_of_t_times_average(self, k):
        W = series_W(1, 2, k)
        # V = d(tW)/dt holds for every term both truncations contain
        assert flux_series(1, 2, k).truncate(2 * k).terms == W.derivative_of_t_times().truncate(2 * k).terms

    def test_printed_comparison(self):
        rows = compare_printed(flux_series(1, 1, 6), printed_flux_terms(1, 1))
        bad = [r.p2 for r in rows if not r.agrees]
        assert bad == [0]
        assert float(rows[1].computed) == -2.0 and float(rows[1].printed) == -0.25

    def test_printed_average_all_agree(self):
        assert all(r.agrees for r in compare_printed(series_W(1, 1, 6), printed_average_terms(1, 1)))

    def test_note(self):
        note = flux_discrepancy_note()
        assert "t^(0/2)" in note and "3.14159" in note and "0.392699" in note


class TestEvaluate:
    def test_single_term(self):
        S = HalfPowerSeries({-1: Cq(2, True)})
        np.testing.assert_allclose(evaluate_series(S, 1 / math.pi).value, 2.0, rtol=1e-15)

    def test_order_ten_quarter(self):
        val = evaluate_series(series_W(1, 1, 10), 0.25)
        np.testing.assert_allclose(val.value, 0.8649, atol=1e-4)
        assert val.truncation < 1e-8 * abs(val.value)

    def test_empty(self):
        assert evaluate_series(HalfPowerSeries(), 3.0).value == 0.0

    @pytest.mark.parametrize("t", [0.0, -1.0, math.nan])
    def test_domain(self, t):
        with pytest.raises(DomainError):
            evaluate_series(series_W(1, 1, 2), t)

    def test_refuses_short_truncation(self):
        with pytest.raises(SeriesTruncationError) as info:
            evaluate_series(series_W(1, 2, 3), 1.0)
        need = info.value.needed_order
        assert need > 3
        evaluate_series(series_W(1, 2, need), 1.0)

    def test_required_order_monotone_in_t(self):
        assert required_order(1, 1, 0.1) <= required_order(1, 1, 1.0) <= required_order(1, 1, 4.0)

    def test_vector(self):
        t = np.array([0.1, 0.5, 1.0])
        np.testing.assert_allclose(evaluate_W(1, 1, t), [evaluate_W(1, 1, x) for x in t], rtol=1e-15)


class TestLaplace:
    def test_value(self):
        np.testing.assert_allclose(laplace_Q(LaplaceClosedForm(1, 1), 4.0), 1 - math.exp(-1), rtol=1e-15)

    def test_vanishes_at_infinity(self):
        assert abs(LaplaceClosedForm(1, 1).Q(1e30)) < 1e-14

    def test_lambda_limit(self):
        np.testing.assert_allclose(LaplaceClosedForm(1, 0).Q(1.0), 2.0)
        np.testing.assert_allclose(LaplaceClosedForm(1, 1e-9).Q(1.0), 2.0, rtol=1e-8)

    @pytest.mark.parametrize("h0, lam", [(1, 1), (1, 2), (2.5, -0.7), (1, 0)])
    @pytest.mark.parametrize("s", S_POINTS)
    def test_ode_residual(self, h0, lam, s):
        assert abs(ode_residual(LaplaceClosedForm(h0, lam), s)) <= 1e-12 * h0 / s**1.5

    def test_zero_data(self):
        form = LaplaceClosedForm(0, 1)
        assert form.Q(2.0) == 0 and ode_residual(form, 2.0) == 0

    @pytest.mark.parametrize("s", [0.0, -1.0])
    def test_domain(self, s):
        with pytest.raises(DomainError):
            LaplaceClosedForm(1, 1).Q(s)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("s", S_POINTS)
    def test_termwise_transform(self, lam, s):
        form = LaplaceClosedForm(1, lam)
        np.testing.assert_allclose(laplace_of_series(series_W(1, lam, 20), s), form.Q(s), rtol=1e-10)

    @pytest.mark.parametrize("lam", [1, Fraction(-3, 2), 2])
    def test_regrouping_matches_taylor(self, lam):
        # order 10 fixes the coefficients of s^(-m/2) for m <= 22
        got = laplace_coefficients_of(series_W(1, lam, 10))
        want = laplace_taylor_coefficients(1, lam, 22)
        for m, a in want.items():
            assert got[m] == Coefficient(a, 0)


class TestSeriesAlgebra:
    series = st.dictionaries(
        st.integers(-1, 12),
        st.builds(Coefficient, st.fractions(max_denominator=50), st.sampled_from([0])),
        max_size=6,
    ).map(HalfPowerSeries)

    @given(series, series)
    def test_add_sub_roundtrip(self, a, b):
        assert ((a + b) - b).terms == a.terms

    @given(series, st.fractions(max_denominator=20).filter(lambda q: q != 0))
    def test_scale_inverse(self, a, q):
        assert a.scale(q).scale(1 / q).terms == a.terms

    @given(series)
    def test_table_roundtrip(self, a):
        assert from_table(to_table(a)).terms == a.terms

    def test_table_format(self):
        assert to_table(series_W(1, 1, 0)) == "-1/2, 2, 1\n0/2, -2, 0\n"

    def test_rejects_strong_singularity(self):
        with pytest.raises(DomainError):
            HalfPowerSeries({-3: Cq(1)})

    def test_shift(self):
        assert HalfPowerSeries({0: Cq(1)}).shift(3).exponents() == [3]

    def test_mixed_pi_rejected(self):
        with pytest.raises(DomainError):
            HalfPowerSeries({1: Cq(1)}) + HalfPowerSeries({1: Cq(1, True)})
