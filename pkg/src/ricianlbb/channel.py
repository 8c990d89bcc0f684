"""Geometry, link budget and the effective Rician/Nakagami link parameters.

Alice carries an ``N_A``-element ULA; Bob has one antenna; Eve has an
``N_E``-element array and combines with MRC.  Angles follow the polar
convention with Alice at the origin and ``0 <= theta <= pi``.

All ratios here (K-factors, SNRs) are linear.  dB conversion happens once
at the config boundary.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .specfun import array_factor

SPEED_OF_LIGHT = 299_792_458.0


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def fold_angle(theta: float) -> float:
    """Map any angle onto ``[0, pi]`` preserving ``cos(theta)``."""
    return abs(((theta + math.pi) % (2.0 * math.pi)) - math.pi)


def nakagami_m(k: float) -> float:
    """Nakagami shape matching a Rician K-factor: ``(K+1)^2 / (2K+1)``."""
    if k < 0:
        raise ValueError(f"K-factor must be >= 0, got {k}")
    # written as 1 + K^2/(2K+1) so rounding never drops it below 1
    return 1.0 + k * k / (2.0 * k + 1.0)


def rician_k_from_m(m: float) -> float:
    """Inverse of :func:`nakagami_m` on the branch ``K >= 0``."""
    if m < 1:
        raise ValueError(f"Nakagami m must be >= 1 to map onto a Rician K, got {m}")
    return (m - 1.0) + math.sqrt(m * m - m)


@dataclass(frozen=True)
class PolarLocation:
    distance: float
    angle: float


@dataclass(frozen=True)
class SystemGeometry:
    """Node locations, array sizes and propagation constants.

    ``element_spacing_*`` default to half a wavelength, which gives
    ``tau = pi``.  Angles outside ``[0, pi]`` are folded (with a warning)
    since only their cosine enters the model.
    """

    bob: PolarLocation
    eve: PolarLocation
    n_alice: int = 3
    n_eve: int = 2
    element_spacing_alice: float | None = None
    element_spacing_eve: float | None = None
    carrier_hz: float = 2.4e9
    propagation_speed: float = SPEED_OF_LIGHT
    ref_distance: float = 1.0
    pathloss_exp_main: float = 2.0
    pathloss_exp_eve: float = 2.0
    eve_arrival_angle: float | None = None

    def __post_init__(self):
        for name, loc in (("bob", self.bob), ("eve", self.eve)):
            if not loc.distance > 0:
                raise ValueError(f"{name} distance must be > 0, got {loc.distance}")
            if not 0.0 <= loc.angle <= math.pi:
                folded = fold_angle(loc.angle)
                warnings.warn(f"{name} angle {loc.angle} folded onto [0, pi] as {folded}",
                              stacklevel=3)
                object.__setattr__(self, name, PolarLocation(loc.distance, folded))
        if self.n_alice < 1 or self.n_eve < 1:
            raise ValueError("array sizes must be >= 1")
        if self.carrier_hz <= 0 or self.propagation_speed <= 0 or self.ref_distance <= 0:
            raise ValueError("carrier, propagation speed and reference distance must be > 0")
        half_wave = 0.5 * self.propagation_speed / self.carrier_hz
        if self.element_spacing_alice is None:
            object.__setattr__(self, "element_spacing_alice", half_wave)
        if self.element_spacing_eve is None:
            object.__setattr__(self, "element_spacing_eve", half_wave)
        if self.element_spacing_alice <= 0 or self.element_spacing_eve <= 0:
            raise ValueError("element spacings must be > 0")

    @property
    def tau_alice(self) -> float:
        return 2.0 * math.pi * self.carrier_hz * self.element_spacing_alice / self.propagation_speed

    @property
    def tau_eve(self) -> float:
        return 2.0 * math.pi * self.carrier_hz * self.element_spacing_eve / self.propagation_speed

    @property
    def theta_bob(self) -> float:
        return self.bob.angle

    @property
    def theta_eve(self) -> float:
        return self.eve.angle

    def with_angles(self, theta_bob: float | None = None, theta_eve: float | None = None) -> "SystemGeometry":
        bob = self.bob if theta_bob is None else PolarLocation(self.bob.distance, theta_bob)
        eve = self.eve if theta_eve is None else PolarLocation(self.eve.distance, theta_eve)
        return replace(self, bob=bob, eve=eve)


def path_gain(d: float, geometry: SystemGeometry, exponent: float) -> float:
    """Free-space reference loss at ``d0`` times ``(d0/d)^exponent``."""
    if not d > 0:
        raise ValueError(f"distance must be > 0, got {d}")
    ref = geometry.propagation_speed / (4.0 * math.pi * geometry.carrier_hz * geometry.ref_distance)
    return ref * ref * (geometry.ref_distance / d) ** exponent


@dataclass(frozen=True)
class LinkBudget:
    transmit_power: float
    noise_var_bob: float
    noise_var_eve: float
    k_bob: float
    k_eve: float

    def __post_init__(self):
        if min(self.transmit_power, self.noise_var_bob, self.noise_var_eve) <= 0:
            raise ValueError("powers and noise variances must be > 0")
        if self.k_bob < 0 or self.k_eve < 0:
            raise ValueError("K-factors must be >= 0")

    @classmethod
    def for_mean_snr(cls, geometry: SystemGeometry, snr_bob: float, snr_eve: float,
                     k_bob: float, k_eve: float, transmit_power: float = 1.0) -> "LinkBudget":
        """Budget whose noise variances reproduce the given mean SNRs at ``geometry``."""
        if snr_bob <= 0 or snr_eve <= 0:
            raise ValueError("mean SNRs must be > 0")
        g_b = path_gain(geometry.bob.distance, geometry, geometry.pathloss_exp_main)
        g_e = path_gain(geometry.eve.distance, geometry, geometry.pathloss_exp_eve)
        return cls(transmit_power, transmit_power * g_b / snr_bob,
                   transmit_power * g_e / snr_eve, k_bob, k_eve)

    def mean_snr_bob(self, geometry: SystemGeometry) -> float:
        g = path_gain(geometry.bob.distance, geometry, geometry.pathloss_exp_main)
        return self.transmit_power * g / self.noise_var_bob

    def mean_snr_eve(self, geometry: SystemGeometry) -> float:
        g = path_gain(geometry.eve.distance, geometry, geometry.pathloss_exp_eve)
        return self.transmit_power * g / self.noise_var_eve


@dataclass(frozen=True)
class Beamformer:
    """Steering beamformer toward direction ``psi`` with unit-norm weights."""

    psi: float
    weights: np.ndarray = field(repr=False)

    @classmethod
    def steer(cls, psi: float, geometry: SystemGeometry) -> "Beamformer":
        if not 0.0 <= psi <= math.pi:
            raise ValueError(f"psi must lie in [0, pi], got {psi}")
        n = geometry.n_alice
        k = np.arange(n)
        w = np.exp(-1j * k * geometry.tau_alice * math.cos(psi)) / math.sqrt(n)
        return cls(psi, w)


@dataclass(frozen=True)
class EffectiveNakagami:
    """Gamma-distributed SNR of one link.

    The SNR is a sum of ``branches`` i.i.d. Nakagami-``m`` branches each with
    mean ``mean_snr``, i.e. Gamma(shape ``branches * m``, rate
    ``m / mean_snr``).
    """

    k_eff: float
    mean_snr: float
    m: float
    branches: int = 1

    def __post_init__(self):
        if self.k_eff < 0:
            raise ValueError(f"k_eff must be >= 0, got {self.k_eff}")
        if not self.mean_snr > 0:
            raise ValueError(f"mean_snr must be > 0, got {self.mean_snr}")
        if self.branches < 1:
            raise ValueError(f"branches must be >= 1, got {self.branches}")
        expected = nakagami_m(self.k_eff)
        if not math.isclose(self.m, expected, rel_tol=1e-9):
            raise ValueError(f"m={self.m} inconsistent with k_eff={self.k_eff} (expected {expected})")

    @classmethod
    def from_k(cls, k: float, mean_snr: float, branches: int = 1) -> "EffectiveNakagami":
        return cls(k, mean_snr, nakagami_m(k), branches)

    @classmethod
    def from_m(cls, m: float, mean_snr: float, branches: int = 1) -> "EffectiveNakagami":
        return cls(rician_k_from_m(m), mean_snr, m, branches)

    @property
    def shape(self) -> float:
        return self.branches * self.m

    @property
    def rate(self) -> float:
        return self.m / self.mean_snr


def steering_alice(angle: float, geometry: SystemGeometry) -> np.ndarray:
    """LOS response of Alice's ULA toward ``angle`` (h_o for Bob, g_o for Eve)."""
    k = np.arange(geometry.n_alice)
    return np.exp(1j * k * geometry.tau_alice * math.cos(angle))


def steering_eve(geometry: SystemGeometry) -> np.ndarray:
    """Response of Eve's ULA at her arrival angle."""
    if geometry.eve_arrival_angle is None:
        raise ValueError("eve_arrival_angle is not set")
    i = np.arange(geometry.n_eve)
    return np.exp(-1j * i * geometry.tau_eve * math.cos(geometry.eve_arrival_angle))


def los_gain(theta: float, psi: float, geometry: SystemGeometry) -> float:
    """``|a(theta) b(psi)|^2`` for the steering beamformer, via the array factor."""
    nu = geometry.tau_alice * (math.cos(theta) - math.cos(psi))
    return array_factor(geometry.n_alice, nu)


def _effective(k: float, gain: float, mean_snr: float, branches: int) -> EffectiveNakagami:
    k_eff = gain * k
    mean = (k * gain + 1.0) * mean_snr / (1.0 + k)
    return EffectiveNakagami.from_k(k_eff, mean, branches)


def effective_main(geometry: SystemGeometry, budget: LinkBudget, beam: Beamformer) -> EffectiveNakagami:
    """Bob's effective K-factor and mean SNR under a steering beamformer."""
    gain = los_gain(geometry.theta_bob, beam.psi, geometry)
    return _effective(budget.k_bob, gain, budget.mean_snr_bob(geometry), 1)


def effective_eve(geometry: SystemGeometry, budget: LinkBudget, beam: Beamformer) -> EffectiveNakagami:
    """Eve's per-antenna effective parameters; ``branches = N_E`` for MRC."""
    gain = los_gain(geometry.theta_eve, beam.psi, geometry)
    return _effective(budget.k_eve, gain, budget.mean_snr_eve(geometry), geometry.n_eve)


def effective_csi_eve(geometry: SystemGeometry, budget: LinkBudget) -> EffectiveNakagami:
    """Eve's per-antenna parameters when Alice transmits along ``h^H / ||h||``."""
    n = geometry.n_alice
    kb, ke = budget.k_bob, budget.k_eve
    # |g_o h_o^H|^2 = N_A * F(N_A, nu)
    cross = n * array_factor(n, geometry.tau_alice * (math.cos(geometry.theta_eve) - math.cos(geometry.theta_bob)))
    k_eff = kb * ke * cross / (n * (kb + ke + 1.0))
    mean = budget.mean_snr_eve(geometry) * (kb * ke * cross + n * (kb + ke + 1.0)) / (n * (kb + 1.0) * (ke + 1.0))
    return EffectiveNakagami.from_k(k_eff, mean, geometry.n_eve)


def lambda0_mean(n_alice: int, n_eve: int, k_eve: float) -> float:
    """Approximate per-branch mean of the largest eigenvalue of ``G G^H``."""
    ratio = (n_alice + n_eve) / (n_alice * n_eve + 1.0)
    if k_eve >= 0.5:
        return k_eve / (k_eve + 1.0) + ratio / (k_eve + 1.0)
    return ratio ** ((4.0 - k_eve) / 6.0)


@dataclass(frozen=True)
class KFactorRecord:
    distance: float
    angle: float
    k: float
    pathloss_exp: float


class KFactorMap:
    """Nearest-neighbour lookup of (K, path-loss exponent) by location.

    Records are (distance, angle, K linear, eta).  Distance between locations
    is Euclidean in the plane.
    """

    def __init__(self, records: list[KFactorRecord]):
        if not records:
            raise ValueError("K-factor map needs at least one record")
        self.records = list(records)
        self._xy = np.array([[r.distance * math.cos(r.angle), r.distance * math.sin(r.angle)]
                             for r in self.records])

    @classmethod
    def from_csv(cls, path: str | Path, angle_unit: str = "rad", k_unit: str = "linear") -> "KFactorMap":
        """Read ``distance,angle,k,eta`` columns (header row required)."""
        records = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                angle = float(row["angle"])
                if angle_unit == "deg":
                    angle = math.radians(angle)
                k = float(row["k"])
                if k_unit == "db":
                    k = db_to_linear(k)
                records.append(KFactorRecord(float(row["distance"]), angle, k, float(row["eta"])))
        return cls(records)

    def lookup(self, distance: float, angle: float) -> KFactorRecord:
        p = np.array([distance * math.cos(angle), distance * math.sin(angle)])
        idx = int(np.argmin(np.sum((self._xy - p) ** 2, axis=1)))
        return self.records[idx]
