from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st
from scipy import integrate

from ricianlbb.specfun import (
    LogValue,
    array_factor,
    binomial_generalized,
    gamma_generalized,
    gamma_ln,
    gamma_p,
    gamma_q,
    log_gamma_generalized,
    lower_incomplete_gamma,
)


class TestLogValue:
    def test_zero_has_sign_zero(self):
        z = LogValue.from_float(0.0)
        assert z.sign == 0 and z.log_magnitude == -math.inf and float(z) == 0.0

    def test_product_and_quotient(self):
        a, b = LogValue.from_float(-3.0), LogValue.from_float(0.25)
        assert float(a * b) == pytest.approx(-0.75, rel=1e-15)
        assert float(a / b) == pytest.approx(-12.0, rel=1e-15)

    def test_power_sign(self):
        a = LogValue.from_float(-2.0)
        assert float(a ** 3) == pytest.approx(-8.0)
        assert float(a ** 2) == pytest.approx(4.0)

    def test_large_magnitudes_do_not_overflow(self):
        big = log_gamma_generalized(400.0) / log_gamma_generalized(398.0)
        assert float(big) == pytest.approx(399.0 * 398.0, rel=1e-12)

    def test_bad_sign_rejected(self):
        with pytest.raises(ValueError):
            LogValue(0.0, 2)


class TestGammaLn:
    def test_reference_points(self):
        assert gamma_ln(1.0) == 0.0
        assert gamma_ln(5.0) == pytest.approx(math.log(24.0), rel=1e-14)
        assert gamma_ln(0.5) == pytest.approx(float(mpmath.log(mpmath.sqrt(mpmath.pi))), rel=1e-13)

    @given(st.floats(min_value=1e-3, max_value=300.0))
    def test_matches_mpmath(self, x):
        ref = float(mpmath.loggamma(x))
        assert gamma_ln(x) == pytest.approx(ref, rel=1e-12, abs=1e-13)

    @pytest.mark.parametrize("x", [0.0, -1.0, -2.5])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            gamma_ln(x)


class TestGammaGeneralized:
    def test_positive_coincides_with_gamma(self):
        assert gamma_generalized(5.0) == pytest.approx(24.0, rel=1e-14)

    def test_negative_integers_follow_harmonic_formula(self):
        assert gamma_generalized(-1.0) == 0.0
        assert gamma_generalized(-2.0) == pytest.approx(-0.25, rel=1e-14)
        # (-1)^3/3! * (1 + 1/2 + 1/3 - 3)
        assert gamma_generalized(-3.0) == pytest.approx(-(11.0 / 6.0 - 3.0) / 6.0, rel=1e-14)

    @pytest.mark.parametrize("x", [-0.5, -1.5, -7.25, -20.7])
    def test_negative_non_integers_match_mpmath(self, x):
        assert gamma_generalized(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-11)

    def test_zero_is_domain_error(self):
        with pytest.raises(ValueError):
            gamma_generalized(0.0)

    def test_exp_of_gamma_ln_on_grid(self):
        for a in np.linspace(0.05, 60.0, 400):
            assert gamma_generalized(a) == pytest.approx(math.exp(gamma_ln(a)), rel=1e-10)


class TestBinomial:
    def test_examples(self):
        assert binomial_generalized(3, 2) == 3.0
        assert binomial_generalized(7.3, 0) == 1.0
        assert binomial_generalized(2.5, 2) == pytest.approx(1.875, rel=1e-15)

    @given(st.integers(0, 60), st.integers(0, 60))
    def test_integer_exact(self, n, l):
        assert binomial_generalized(n, l) == float(math.comb(n, l))

    def test_partial_sums_converge_to_power(self):
        for alpha in (1.35, 2.7, 5.76, 15.754):
            total = sum(binomial_generalized(alpha, l) * 0.5 ** l for l in range(61))
            assert total == pytest.approx(1.5 ** alpha, rel=1e-8)

    def test_negative_l_rejected(self):
        with pytest.raises(ValueError):
            binomial_generalized(2.0, -1)


class TestIncompleteGamma:
    def test_examples(self):
        assert lower_incomplete_gamma(1.0, 0.0) == 0.0
        assert lower_incomplete_gamma(1.0, math.log(2.0)) == pytest.approx(0.5, rel=1e-14)
        ref, _ = integrate.quad(lambda t: math.exp(-t) * t ** 1.5, 0.0, 3.0, epsabs=0, epsrel=1e-13)
        assert lower_incomplete_gamma(2.5, 3.0) == pytest.approx(ref, rel=1e-10)

    @given(st.floats(min_value=0.05, max_value=80.0), st.floats(min_value=0.0, max_value=200.0))
    def test_regularized_matches_mpmath(self, a, x):
        ref = float(mpmath.gammainc(a, 0, x, regularized=True))
        assert gamma_p(a, x) == pytest.approx(ref, rel=1e-10, abs=1e-300)
        refq = float(mpmath.gammainc(a, x, mpmath.inf, regularized=True))
        assert gamma_q(a, x) == pytest.approx(refq, rel=1e-9, abs=1e-15)

    @given(st.floats(min_value=0.1, max_value=40.0))
    def test_bounded_by_gamma_and_saturates(self, a):
        g = math.exp(gamma_ln(a))
        xs = np.linspace(0.0, 10.0 * a, 25)
        vals = [lower_incomplete_gamma(a, float(x)) for x in xs]
        assert all(v <= g * (1 + 1e-12) for v in vals)
        assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))
        assert lower_incomplete_gamma(a, 50.0 * a + 60.0) == pytest.approx(g, rel=1e-12)

    @pytest.mark.parametrize("a,x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.1)])
    def test_domain(self, a, x):
        with pytest.raises(ValueError):
            lower_incomplete_gamma(a, x)


def _direct_af(n, nu):
    s = sum(cmath.exp(1j * k * nu) for k in range(n))
    return abs(s) ** 2 / n


class TestArrayFactor:
    def test_examples(self):
        assert array_factor(4, 0.0) == 4.0
        assert array_factor(4, math.pi / 2) == pytest.approx(0.0, abs=1e-15)
        ref = (math.sin(1.5 * 0.7) / math.sin(0.35)) ** 2 / 3
        assert array_factor(3, 0.7) == pytest.approx(ref, rel=1e-14)

    def test_removable_singularity_from_roundoff(self):
        assert array_factor(5, 2.0 * math.pi * (1 + 1e-13)) == 5.0

    @given(st.integers(1, 16), st.floats(min_value=0.0, max_value=2 * math.pi, exclude_max=True))
    @example(11, 5.960464477539063e-08)  # near a grating peak, n * nu/2 used to round badly
    def test_range_symmetry_and_direct_sum(self, n, nu):
        f = array_factor(n, nu)
        assert -1e-12 <= f <= n + 1e-12
        assert f == pytest.approx(array_factor(n, 2 * math.pi - nu), rel=1e-8, abs=1e-9)
        assert f == pytest.approx(_direct_af(n, nu), rel=1e-8, abs=1e-9)

    @pytest.mark.parametrize("n", [2, 3, 4, 7, 16])
    def test_zeros(self, n):
        for k in range(1, n):
            assert array_factor(n, 2 * k * math.pi / n) == pytest.approx(0.0, abs=1e-20 + 1e-12)

    def test_random_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(10_000):
            n = int(rng.integers(1, 17))
            f = array_factor(n, float(rng.uniform(0, 2 * math.pi)))
            assert 0.0 <= f <= n + 1e-12

    def test_needs_an_element(self):
        with pytest.raises(ValueError):
            array_factor(0, 0.1)
