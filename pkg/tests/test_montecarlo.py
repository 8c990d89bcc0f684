from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from ricianlbb.analytic import nakagami_pair, outage_quadrature, scheme_lbb, scheme_nb
from ricianlbb.channel import (
    Beamformer,
    EffectiveNakagami,
    LinkBudget,
    PolarLocation,
    SystemGeometry,
    db_to_linear,
    steering_alice,
)
from ricianlbb.montecarlo import (
    block_rng,
    estimate,
    estimate_nakagami,
    estimate_params,
    eve_los_matrix,
    eve_los_power,
    sample_eve_channel,
    sample_main_channel,
    scheme_snrs,
)

from sweep import random_params


def setting(k_bob=10.0, k_eve=db_to_linear(5.0), phi=None, n_alice=3, n_eve=2, snr_bob_db=10.0):
    g = SystemGeometry(PolarLocation(10.0, math.pi / 3), PolarLocation(10.0, math.pi / 4), n_alice, n_eve,
                       eve_arrival_angle=phi)
    return g, LinkBudget.for_mean_snr(g, db_to_linear(snr_bob_db), db_to_linear(5.0), k_bob, k_eve)


class TestChannelDraws:
    def test_los_limit(self):
        g, b = setting(k_bob=1e12)
        h = sample_main_channel(block_rng(1, 0), g, b, 1000)
        assert np.max(np.abs(h - steering_alice(g.theta_bob, g))) < 1e-4

    @pytest.mark.parametrize("k", [0.0, 0.5, 10.0, 1e3])
    def test_unit_power_per_element(self, k):
        g, b = setting(k_bob=k)
        h = sample_main_channel(block_rng(2, 0), g, b, 100_000)
        np.testing.assert_allclose(np.mean(np.abs(h) ** 2, axis=0), 1.0, rtol=0.02)

    @pytest.mark.parametrize("k", [0.0, 3.0, 1e3])
    def test_eve_frobenius_power(self, k):
        g, b = setting(k_eve=k, phi=0.4)
        mat = sample_eve_channel(block_rng(3, 0), g, b, 100_000)
        power = np.mean(np.sum(np.abs(mat) ** 2, axis=(1, 2)))
        assert power == pytest.approx(g.n_alice * g.n_eve, rel=0.02)

    def test_strong_los_eve_is_rank_one(self):
        g, b = setting(k_eve=1e12, phi=1.0)
        mat = sample_eve_channel(block_rng(4, 0), g, b, 1000)
        assert np.max(np.linalg.svd(mat, compute_uv=False)[:, -1]) < 1e-4

    def test_scatter_is_cscg(self):
        g, b = setting(k_eve=0.0, phi=0.0)
        mat = sample_eve_channel(block_rng(5, 0), g, b, 20_000)
        re = mat.real.ravel() * math.sqrt(2.0)
        assert stats.kstest(re, "norm").pvalue > 0.01
        im = mat.imag.ravel() * math.sqrt(2.0)
        assert stats.kstest(im, "norm").pvalue > 0.01

    def test_single_draw_shapes(self):
        g, b = setting(phi=0.0)
        assert sample_main_channel(block_rng(0, 0), g, b).shape == (3,)
        assert sample_eve_channel(block_rng(0, 0), g, b).shape == (2, 3)


class TestArrivalAngleInvariance:
    def test_eve_snr_distribution(self):
        beam_psi = 1.2
        samples = []
        for phi in (0.0, 2.1):
            g, b = setting(phi=phi)
            rng = block_rng(77, 0)
            h = sample_main_channel(rng, g, b, 100_000)
            mat = sample_eve_channel(rng, g, b, 100_000)
            _, ge = scheme_snrs("lbb", h, mat, 10.0, 3.0, Beamformer.steer(beam_psi, g))
            samples.append(ge)
        assert stats.ks_2samp(*samples).pvalue > 0.01

    def test_los_power(self):
        powers = []
        for phi in (0.0, 0.7, 2.1, math.pi):
            g, _ = setting(phi=phi)
            beam = Beamformer.steer(1.2, g)
            powers.append(eve_los_power(g, beam))
            direct = float(np.sum(np.abs(eve_los_matrix(g) @ beam.weights) ** 2))
            assert direct == pytest.approx(powers[-1], rel=1e-12)
        assert len(set(powers)) == 1


class TestEstimates:
    def test_zero_rate_indicators_are_complements(self):
        g, b = setting()
        for scheme, beam in (("lbb", Beamformer.steer(1.0, g)), ("nb", None), ("csi", None)):
            r = estimate(scheme, g, b, beam, 0.0, trials=50_000, seed=9)
            assert r.outage_count + r.pnon_count == r.trials

    def test_exchangeable_exponentials(self):
        e = EffectiveNakagami.from_m(1.0, 2.0)
        r = estimate_nakagami(e, e, 0.0, trials=200_000, seed=1)
        assert abs(r.estimate_outage - 0.5) <= 3 * r.sigma_outage

    def test_ci_halfwidth(self):
        e = EffectiveNakagami.from_m(1.0, 2.0)
        r = estimate_nakagami(e, e, 0.5, trials=10_000, seed=1)
        p = r.estimate_outage
        assert r.ci_halfwidth_95 == pytest.approx(1.96 * math.sqrt(p * (1 - p) / 10_000), rel=1e-15)
        assert 0.0 <= r.estimate_outage <= 1.0 and 0.0 <= r.estimate_pnon <= 1.0

    def test_reproducible_and_independent_of_workers(self):
        g, b = setting()
        beam = Beamformer.steer(1.3, g)
        kw = dict(trials=30_000, seed=123, block_size=4096)
        one = estimate("lbb", g, b, beam, 1.0, workers=1, **kw)
        again = estimate("lbb", g, b, beam, 1.0, workers=1, **kw)
        two = estimate("lbb", g, b, beam, 1.0, workers=2, **kw)
        assert one == again == two

    def test_seeds_differ(self):
        e = EffectiveNakagami.from_m(1.3, 2.0)
        a = estimate_nakagami(e, e, 0.5, trials=10_000, seed=1)
        b = estimate_nakagami(e, e, 0.5, trials=10_000, seed=2)
        assert a.outage_count != b.outage_count

    def test_trials_must_be_positive(self):
        e = EffectiveNakagami.from_m(1.0, 1.0)
        with pytest.raises(ValueError):
            estimate_nakagami(e, e, 0.0, trials=0)

    def test_lbb_needs_beam(self):
        g, b = setting()
        with pytest.raises(ValueError):
            estimate("lbb", g, b, None, 1.0, trials=10)

    @pytest.mark.parametrize("i", [3, 40, 77])
    def test_gamma_draws_match_quadrature(self, i):
        p = random_params(200)[i]
        r = estimate_params(p, trials=200_000, seed=i)
        q = outage_quadrature(p).value
        assert abs(r.estimate_outage - q) <= 3 * math.sqrt(q * (1 - q) / r.trials) + 1e-12

    def test_fig2_setting(self):
        p = nakagami_pair(2 * 1.35, 3 * 10.0, 1.33, db_to_linear(5.0), 1.0, 1, 2)
        r = estimate_params(p, trials=1_000_000, seed=0)
        q = outage_quadrature(p).value
        assert abs(r.estimate_outage - q) <= 3 * math.sqrt(q * (1 - q) / r.trials)

    def test_rician_and_gamma_draws_close(self):
        g, b = setting()
        beam = Beamformer.steer(math.pi / 3, g)
        rician = estimate("lbb", g, b, beam, 1.0, trials=200_000, seed=4)
        gamma = estimate_params(scheme_lbb(g, b, beam, 1.0), trials=200_000, seed=4)
        assert abs(rician.estimate_outage - gamma.estimate_outage) <= 0.02
        rician = estimate("nb", g, b, None, 1.0, trials=200_000, seed=4)
        gamma = estimate_params(scheme_nb(g, b, 1.0), trials=200_000, seed=4)
        assert abs(rician.estimate_outage - gamma.estimate_outage) <= 0.02


def test_scheme_snr_formulas():
    rng = np.random.default_rng(0)
    h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    mat = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    g, _ = setting()
    beam = Beamformer.steer(0.9, g)
    gb, ge = scheme_snrs("lbb", h, mat, 2.0, 3.0, beam)
    assert gb == pytest.approx(2.0 * abs(h @ beam.weights) ** 2)
    assert ge == pytest.approx(3.0 * np.linalg.norm(mat @ beam.weights) ** 2)
    gb, ge = scheme_snrs("nb", h, mat, 2.0, 3.0, None)
    assert gb == pytest.approx(2.0 * np.linalg.norm(h) ** 2 / 3)
    assert ge == pytest.approx(3.0 * np.linalg.eigvalsh(mat @ mat.conj().T)[-1] / 3)
    gb, ge = scheme_snrs("csi", h, mat, 2.0, 3.0, None)
    w = h.conj() / np.linalg.norm(h)
    assert gb == pytest.approx(2.0 * abs(h @ w) ** 2)
    assert ge == pytest.approx(3.0 * np.linalg.norm(mat @ w) ** 2)
    with pytest.raises(ValueError):
        scheme_snrs("mrt", h, mat, 1.0, 1.0, None)
