from __future__ import annotations

import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from ricianlbb.analytic import (
    SchemeParams,
    Truncation,
    diversity_order,
    nakagami_pair,
    outage_quadrature,
    outage_series,
    pnon_exact,
    pnon_series,
    scheme_csi,
    scheme_lbb,
    scheme_nb,
)
from ricianlbb.channel import (
    Beamformer,
    EffectiveNakagami,
    LinkBudget,
    PolarLocation,
    SystemGeometry,
    db_to_linear,
    nakagami_m,
)

from sweep import random_params

SWEEP = random_params(200)


def fig2_params(snr_bob_db=10.0, snr_eve_db=5.0, rate=1.0) -> SchemeParams:
    g_b, g_e = db_to_linear(snr_bob_db), db_to_linear(snr_eve_db)
    return nakagami_pair(2 * 1.35, 3 * g_b, 1.33, g_e, rate, 1, 2)


def fig3(theta_e=math.pi / 4, snr_bob_db=10.0, k_eve_db=5.0, k_bob_db=10.0):
    g = SystemGeometry(PolarLocation(10.0, math.pi / 3), PolarLocation(10.0, theta_e), 3, 2)
    b = LinkBudget.for_mean_snr(g, db_to_linear(snr_bob_db), db_to_linear(5.0),
                                db_to_linear(k_bob_db), db_to_linear(k_eve_db))
    return g, b


def mp_outage(p: SchemeParams) -> float:
    """Independent high-precision quadrature of Pr(1 + gB <= 2^R (1 + gE))."""
    a, beta, b, eps = (mpmath.mpf(v) for v in (p.main.shape, p.main.rate, p.eve.shape, p.eve.rate))
    c = mpmath.mpf(2) ** p.rate
    mpmath.mp.dps = 30

    def f(x):
        return (eps ** b * x ** (b - 1) * mpmath.exp(-eps * x) / mpmath.gamma(b)
                * mpmath.gammainc(a, 0, beta * (c * (1 + x) - 1), regularized=True))

    mean = b / eps
    sd = mpmath.sqrt(b) / eps
    pts = [0, mean, mean + 10 * sd, mean + 60 * sd + 50 / eps, mpmath.inf]
    return float(mpmath.quad(f, pts))


class TestSeriesAgainstOracles:
    def test_sweep_series_matches_quadrature(self):
        bad = []
        for i, p in enumerate(SWEEP):
            s, q = outage_series(p).value, outage_quadrature(p).value
            if abs(s - q) > max(1e-6 * abs(q), 1e-12):
                bad.append((i, s, q))
        assert not bad

    @pytest.mark.parametrize("i", [0, 17, 63, 101, 150, 199])
    def test_quadrature_matches_mpmath(self, i):
        p = SWEEP[i]
        ref = mp_outage(p)
        assert outage_quadrature(p).value == pytest.approx(ref, rel=1e-8, abs=1e-12)

    def test_fig2_setting(self):
        p = fig2_params()
        s = outage_series(p)
        assert s.method == "series" and s.converged
        assert s.value == pytest.approx(outage_quadrature(p).value, rel=1e-6)
        assert s.value == pytest.approx(mp_outage(p), rel=1e-6)

    def test_bare_double_series_exact_for_integer_main_shape(self):
        # Bob-side shape 3 and 5: the double series needs no complement term
        for m_b, n_b in ((1.0, 3), (1.0, 5)):
            p = nakagami_pair(m_b, 4.0, 1.7, 1.3, 0.8, n_b, 2)
            s = outage_series(p, complement=False, fallback=False)
            assert s.value == pytest.approx(mp_outage(p), rel=1e-9)

    def test_complement_needed_for_fractional_main_shape(self):
        p = SWEEP[146]
        assert not float(p.main.shape).is_integer()
        bare = outage_series(p, complement=False, fallback=False).raw_value
        assert abs(bare - outage_quadrature(p).value) > 1e-3
        assert outage_series(p).value == pytest.approx(outage_quadrature(p).value, rel=1e-9)

    def test_high_main_snr_drives_outage_to_zero(self):
        p = nakagami_pair(2.0, 1e12, 1.5, 3.0, 1.0, 1, 2)
        assert outage_series(p).value < 1e-6

    def test_vanishing_eve(self):
        p = nakagami_pair(2.7, 5.0, 1.33, 1e-9, 1.0, 1, 2)
        a, beta = p.main.shape, p.main.rate
        expected = special.gammainc(a, beta * (2.0 ** 1.0 - 1.0))
        assert outage_quadrature(p).value == pytest.approx(expected, rel=1e-7)
        assert outage_series(p).value == pytest.approx(expected, rel=1e-6)

    def test_exchangeable_links(self):
        p = nakagami_pair(1.0, 3.0, 1.0, 3.0, 0.0)
        assert outage_quadrature(p).value == pytest.approx(0.5, abs=1e-12)
        assert outage_series(p).value == pytest.approx(0.5, abs=1e-12)
        assert pnon_series(p).value == pytest.approx(0.5, abs=1e-12)
        p = nakagami_pair(4.2, 0.7, 4.2, 0.7, 0.0)
        assert pnon_series(p).value == pytest.approx(0.5, abs=1e-12)

    def test_pnon_large_main_snr(self):
        p = nakagami_pair(2.0, 1e12, 1.5, 3.0, 0.0, 1, 2)
        assert pnon_series(p).value == pytest.approx(1.0, abs=1e-9)


class TestPnonIdentity:
    def test_sweep_identity(self):
        for p in SWEEP:
            p0 = replace(p, rate=0.0)
            pn = pnon_series(p0).value
            assert pn == pytest.approx(1.0 - outage_series(p0).value, abs=1e-9)
            assert pn == pytest.approx(pnon_exact(p0), abs=1e-9)

    def test_fig3_optimal_beam(self):
        from ricianlbb.optimizer import optimize_psi

        g, b = fig3()
        psi = optimize_psi(g, b, 1.0).psi_star
        p = scheme_lbb(g, b, Beamformer.steer(psi, g), 0.0)
        assert pnon_series(p).value == pytest.approx(1.0 - outage_series(p).value, abs=1e-9)


class TestMonotonicity:
    base = nakagami_pair(2.7, 30.0, 1.33, 3.0, 1.0, 1, 2)

    def _curve(self, make):
        return np.array([outage_series(make(x)).value for x in np.geomspace(0.1, 1e4, 20)])

    def test_decreasing_in_main_snr(self):
        v = self._curve(lambda x: replace(self.base, main=EffectiveNakagami.from_m(2.7, x)))
        assert np.all(np.diff(v) <= 1e-12)

    def test_increasing_in_eve_snr(self):
        v = self._curve(lambda x: replace(self.base, eve=EffectiveNakagami.from_m(1.33, x, 2)))
        assert np.all(np.diff(v) >= -1e-12)

    def test_increasing_in_rate(self):
        v = [outage_series(replace(self.base, rate=r)).value for r in np.linspace(0.0, 4.0, 20)]
        assert np.all(np.diff(v) >= -1e-12)

    @given(st.integers(0, 199))
    def test_range(self, i):
        r = outage_series(SWEEP[i])
        assert 0.0 <= r.value <= 1.0
        assert r.converged == (r.method == "series")


class TestFallback:
    def test_fixed_truncation_without_fallback_reports_failure(self):
        # Eve's SNR tail reaches far beyond what 20 n-terms cover
        p = nakagami_pair(1.0, 1.0, 1.0, 1.0, 1.0, 1, 4)
        r = outage_series(p, Truncation(n_max=20, l_max=20))
        assert r.method == "quadrature" and not r.converged
        assert r.value == pytest.approx(outage_quadrature(p).value, rel=1e-12)
        raw = outage_series(p, Truncation(n_max=20, l_max=20), fallback=False)
        assert raw.method == "series" and not raw.converged and raw.note

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            nakagami_pair(1.0, 1.0, 1.0, 1.0, -0.5)


class TestDiversity:
    def test_accessor(self):
        assert diversity_order(EffectiveNakagami.from_k(0.0, 5.0)) == 1.0
        assert diversity_order(EffectiveNakagami.from_k(30.0, 5.0)) == pytest.approx(31 ** 2 / 61)
        g, b = fig3()
        assert diversity_order(scheme_nb(g, b, 1.0).main) == pytest.approx(3 * 11 ** 2 / 21, rel=1e-12)

    def test_lbb_slope_between_50_and_70_db(self):
        g, _ = fig3()
        vals = []
        for snr_db in (50.0, 70.0):
            _, b = fig3(snr_bob_db=snr_db)
            vals.append(outage_series(scheme_lbb(g, b, Beamformer.steer(g.theta_bob, g), 1.0)).value)
        slope = -(math.log10(vals[1]) - math.log10(vals[0])) / 2.0
        assert slope == pytest.approx(31 ** 2 / 61, rel=0.10)


class TestSchemeAssembly:
    def test_nb_independent_of_angles(self):
        g, b = fig3()
        ref = scheme_nb(g, b, 1.0)
        for tb, te in ((0.1, 2.9), (math.pi / 2, math.pi / 2), (3.0, 0.0)):
            g2 = g.with_angles(tb, te)
            assert scheme_nb(g2, b, 1.0) == ref

    def test_lbb_rayleigh_eve(self):
        g, b = fig3(k_eve_db=-math.inf)
        p = scheme_lbb(g, b, Beamformer.steer(g.theta_bob, g), 1.0)
        assert p.eve.m == 1.0 and p.eve.shape == 2.0

    def test_csi_aligned(self):
        g, b = fig3(theta_e=math.pi / 3)
        kb, ke = b.k_bob, b.k_eve
        p = scheme_csi(g, b, 1.0)
        assert p.eve.m == pytest.approx(nakagami_m(3 * kb * ke / (kb + ke + 1)), rel=1e-12)
        assert p.main.shape == pytest.approx(3 * nakagami_m(kb))

    @pytest.mark.parametrize("scheme", ["nb", "csi"])
    def test_scheme_series_against_quadrature(self, scheme):
        for snr in (0.0, 5.0, 10.0, 15.0, 20.0):
            g, b = fig3(snr_bob_db=snr)
            p = scheme_nb(g, b, 1.0) if scheme == "nb" else scheme_csi(g, b, 1.0)
            assert outage_series(p).value == pytest.approx(outage_quadrature(p).value, rel=1e-6, abs=1e-12)
