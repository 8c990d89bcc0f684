"""Monte Carlo estimates of secrecy outage and P_non from channel draws.

Trials are split into fixed-size blocks.  Block ``j`` draws from a Philox
generator keyed by the seed with its counter starting at ``j << 64`` in the
second counter word, so every block owns a disjoint stream.  Blocks return
integer indicator counts that are summed in block order, which keeps the
estimates bit-identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .analytic import SchemeParams
from .channel import (
    Beamformer,
    EffectiveNakagami,
    LinkBudget,
    SystemGeometry,
    steering_alice,
)

Scheme = Literal["lbb", "nb", "csi"]
BLOCK_SIZE = 1 << 16
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TrialBatch:
    seed: int
    trials: int
    scheme: str
    estimate_outage: float
    estimate_pnon: float
    ci_halfwidth_95: float
    outage_count: int = 0
    pnon_count: int = 0

    @property
    def sigma_outage(self) -> float:
        p = self.estimate_outage
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def ci_halfwidth_pnon(self) -> float:
        return _halfwidth(self.estimate_pnon, self.trials)


def _halfwidth(p: float, n: int) -> float:
    return 1.96 * math.sqrt(p * (1.0 - p) / n)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for one block: Philox keyed by ``seed``, counter at ``block << 64``."""
    bitgen = np.random.Philox(key=seed & _SEED_MASK, counter=[0, block, 0, 0])
    return np.random.Generator(bitgen)


def _cscg(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian entries with unit variance."""
    z = rng.standard_normal((*shape, 2)) * math.sqrt(0.5)
    return z[..., 0] + 1j * z[..., 1]


def _eve_array(geometry: SystemGeometry) -> np.ndarray:
    phi = geometry.eve_arrival_angle if geometry.eve_arrival_angle is not None else 0.0
    i = np.arange(geometry.n_eve)
    return np.exp(-1j * i * geometry.tau_eve * math.cos(phi))


def eve_los_matrix(geometry: SystemGeometry) -> np.ndarray:
    """Deterministic LOS part ``r_o^T g_o`` of Eve's channel (N_E x N_A)."""
    return np.outer(_eve_array(geometry), steering_alice(geometry.theta_eve, geometry))


def eve_los_power(geometry: SystemGeometry, beam: Beamformer) -> float:
    """``||G_o b||^2`` through ``||r_o||^2 = N_E``; it never reads the arrival angle."""
    return geometry.n_eve * float(np.abs(steering_alice(geometry.theta_eve, geometry) @ beam.weights) ** 2)


def sample_main_channel(rng: np.random.Generator, geometry: SystemGeometry, budget: LinkBudget,
                        size: int | None = None) -> np.ndarray:
    """Rician draw of Bob's channel ``h``; shape ``(N_A,)`` or ``(size, N_A)``."""
    k = budget.k_bob
    shape = (geometry.n_alice,) if size is None else (size, geometry.n_alice)
    h_o = steering_alice(geometry.theta_bob, geometry)
    return math.sqrt(k / (1.0 + k)) * h_o + math.sqrt(1.0 / (1.0 + k)) * _cscg(rng, shape)


def sample_eve_channel(rng: np.random.Generator, geometry: SystemGeometry, budget: LinkBudget,
                       size: int | None = None) -> np.ndarray:
    """Rician draw of Eve's channel ``G``; shape ``(N_E, N_A)`` or batched."""
    k = budget.k_eve
    base = (geometry.n_eve, geometry.n_alice)
    shape = base if size is None else (size, *base)
    g_o = eve_los_matrix(geometry)
    return math.sqrt(k / (1.0 + k)) * g_o + math.sqrt(1.0 / (1.0 + k)) * _cscg(rng, shape)


def scheme_snrs(scheme: str, h: np.ndarray, g: np.ndarray, snr_bob: float, snr_eve: float,
                beam: Beamformer | None) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous ``(gamma_B, gamma_E)`` for batched ``h`` and ``G``."""
    n_alice = h.shape[-1]
    if scheme == "lbb":
        if beam is None:
            raise ValueError("the lbb scheme needs a beamformer")
        w = beam.weights
        gamma_b = snr_bob * np.abs(h @ w) ** 2
        gamma_e = snr_eve * np.sum(np.abs(g @ w) ** 2, axis=-1)
    elif scheme == "nb":
        norm_h = np.sum(np.abs(h) ** 2, axis=-1)
        lam = np.linalg.svd(g, compute_uv=False)[..., 0]
        gamma_b = snr_bob * norm_h / n_alice
        gamma_e = snr_eve * lam * lam / n_alice
    elif scheme == "csi":
        norm_h = np.sum(np.abs(h) ** 2, axis=-1)
        gh = np.einsum("...ij,...j->...i", g, np.conj(h))
        gamma_b = snr_bob * norm_h
        gamma_e = snr_eve * np.sum(np.abs(gh) ** 2, axis=-1) / norm_h
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return gamma_b, gamma_e


def _indicators(gamma_b: np.ndarray, gamma_e: np.ndarray, rate: float) -> tuple[int, int]:
    # C_s < R  <=>  1 + gamma_B <= 2^R (1 + gamma_E); at R = 0 the two
    # comparisons below are exact complements
    lhs = 1.0 + gamma_b
    rhs = 1.0 + gamma_e
    outage = int(np.count_nonzero(lhs <= (2.0 ** rate) * rhs))
    pnon = int(np.count_nonzero(lhs > rhs))
    return outage, pnon


def _block_sizes(trials: int, block_size: int) -> list[int]:
    full, rem = divmod(trials, block_size)
    return [block_size] * full + ([rem] if rem else [])


@dataclass(frozen=True)
class _RicianJob:
    scheme: str
    geometry: SystemGeometry
    budget: LinkBudget
    psi: float | None
    rate: float
    seed: int


@dataclass(frozen=True)
class _GammaJob:
    main: EffectiveNakagami
    eve: EffectiveNakagami
    rate: float
    seed: int


def _run_block(job, block: int, size: int) -> tuple[int, int]:
    rng = block_rng(job.seed, block)
    if isinstance(job, _GammaJob):
        gamma_b = rng.gamma(job.main.shape, 1.0 / job.main.rate, size)
        gamma_e = rng.gamma(job.eve.shape, 1.0 / job.eve.rate, size)
        return _indicators(gamma_b, gamma_e, job.rate)
    g = job.geometry
    h = sample_main_channel(rng, g, job.budget, size)
    mat = sample_eve_channel(rng, g, job.budget, size)
    beam = Beamformer.steer(job.psi, g) if job.psi is not None else None
    gamma_b, gamma_e = scheme_snrs(job.scheme, h, mat, job.budget.mean_snr_bob(g),
                                   job.budget.mean_snr_eve(g), beam)
    return _indicators(gamma_b, gamma_e, job.rate)


def _run_block_args(args):
    return _run_block(*args)


def _collect(job, scheme: str, trials: int, workers: int, block_size: int) -> TrialBatch:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    sizes = _block_sizes(trials, block_size)
    tasks = [(job, j, n) for j, n in enumerate(sizes)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_run_block_args, tasks))
    else:
        counts = [_run_block(*t) for t in tasks]
    n_out = sum(c[0] for c in counts)
    n_pnon = sum(c[1] for c in counts)
    p_out = n_out / trials
    return TrialBatch(job.seed, trials, scheme, p_out, n_pnon / trials,
                      _halfwidth(p_out, trials), n_out, n_pnon)


def estimate(scheme: Scheme, geometry: SystemGeometry, budget: LinkBudget, beam: Beamformer | None,
             rate: float, trials: int = 1_000_000, seed: int = 0, workers: int = 1,
             block_size: int = BLOCK_SIZE) -> TrialBatch:
    """Outage and P_non from Rician draws of ``h`` and ``G``.

    ``beam`` is used by ``lbb`` only.  NB takes Eve's SNR from the largest
    singular value of ``G``; CSI uses the exact ``||G h^*||^2 / ||h||^2``.
    """
    if scheme not in ("lbb", "nb", "csi"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if scheme == "lbb" and beam is None:
        raise ValueError("the lbb scheme needs a beamformer")
    psi = beam.psi if (scheme == "lbb" and beam is not None) else None
    job = _RicianJob(scheme, geometry, budget, psi, rate, seed)
    return _collect(job, scheme, trials, workers, block_size)


def estimate_nakagami(main: EffectiveNakagami, eve: EffectiveNakagami, rate: float,
                      trials: int = 1_000_000, seed: int = 0, workers: int = 1,
                      block_size: int = BLOCK_SIZE, scheme: str = "nakagami") -> TrialBatch:
    """Outage and P_non with both SNRs drawn from their gamma laws."""
    return _collect(_GammaJob(main, eve, rate, seed), scheme, trials, workers, block_size)


def estimate_params(p: SchemeParams, trials: int = 1_000_000, seed: int = 0,
                    workers: int = 1) -> TrialBatch:
    """:func:`estimate_nakagami` on the two links of a :class:`SchemeParams`."""
    return estimate_nakagami(p.main, p.eve, p.rate, trials, seed, workers, scheme=p.scheme)
