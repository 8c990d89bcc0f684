"""Run configuration: INI sections, environment overrides and unit handling.

Every dB and degree value is converted here, once.  The rest of the
package only sees linear ratios and radians.

Sections and keys (K and SNR values in dB, angles per ``[geometry] units``)::

    [geometry]  units, n_alice, n_eve, theta_bob, theta_eve, distance_bob,
                distance_eve, eve_arrival_angle, carrier_hz,
                pathloss_exp_main, pathloss_exp_eve
    [budget]    snr_bob, snr_eve, k_bob, k_eve
    [scheme]    name (lbb|nb|csi), rate, psi (opt or an angle), eve_angle_known
    [nakagami]  m_bob, m_eve, lambda0   (optional: gamma links given directly)
    [optimize]  grid_points, scan_method, max_refine
    [sweep]     parameter, start, stop, points, scale (linear|db), schemes
                (scale sets the point spacing; dB parameters default to db)
    [mc]        enabled, trials, seed, workers
    [output]    format (csv|json|svg), path
    [kmap]      path, angle_unit, k_unit   (optional K-factor lookup)

Any key can be overridden with an environment variable named
``RS_<SECTION>_<KEY>`` in upper case, e.g. ``RS_BUDGET_SNR_BOB=12``.
"""
from __future__ import annotations

import configparser
import math
import os
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .channel import (
    EffectiveNakagami,
    KFactorMap,
    LinkBudget,
    PolarLocation,
    SystemGeometry,
    db_to_linear,
)

ENV_PREFIX = "RS_"
SCHEMES = ("lbb", "nb", "csi")
FORMATS = ("csv", "json", "svg")
SWEEP_PARAMETERS = ("snr_bob", "snr_eve", "k_bob", "k_eve", "theta_bob", "theta_eve", "rate",
                    "distance_bob", "distance_eve")
_ANGLE_PARAMETERS = ("theta_bob", "theta_eve")
_DB_PARAMETERS = ("snr_bob", "snr_eve", "k_bob", "k_eve")

_KNOWN_KEYS = {
    "geometry": {"units", "n_alice", "n_eve", "theta_bob", "theta_eve", "distance_bob", "distance_eve",
                 "eve_arrival_angle", "carrier_hz", "pathloss_exp_main", "pathloss_exp_eve"},
    "budget": {"snr_bob", "snr_eve", "k_bob", "k_eve"},
    "scheme": {"name", "rate", "psi", "eve_angle_known"},
    "nakagami": {"m_bob", "m_eve", "lambda0"},
    "optimize": {"grid_points", "scan_method", "max_refine"},
    "sweep": {"parameter", "start", "stop", "points", "scale", "schemes"},
    "mc": {"enabled", "trials", "seed", "workers"},
    "output": {"format", "path"},
    "kmap": {"path", "angle_unit", "k_unit"},
}


class ConfigError(ValueError):
    """Bad or missing configuration value; message names the key and line."""


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        """Grid in config units (dB for SNR/K, radians for angles)."""
        if self.scale == "linear":
            if self.parameter in _DB_PARAMETERS:
                lin = np.linspace(db_to_linear(self.start), db_to_linear(self.stop), self.points)
                return 10.0 * np.log10(lin)
            return np.linspace(self.start, self.stop, self.points)
        # uniform spacing in dB
        if self.parameter in _DB_PARAMETERS:
            return np.linspace(self.start, self.stop, self.points)
        if self.start <= 0 or self.stop <= 0:
            raise ConfigError(f"[sweep] scale = db needs positive start/stop for {self.parameter}")
        return np.geomspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class NakagamiLinks:
    """Gamma-link parameters given directly instead of through Rician K."""

    m_bob: float
    m_eve: float
    lambda0: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    n_alice: int = 3
    n_eve: int = 2
    theta_bob: float = math.pi / 3
    theta_eve: float = math.pi / 4
    distance_bob: float = 10.0
    distance_eve: float = 10.0
    eve_arrival_angle: float | None = None
    carrier_hz: float = 2.4e9
    pathloss_exp_main: float = 2.0
    pathloss_exp_eve: float = 2.0
    snr_bob_db: float = 10.0
    snr_eve_db: float = 5.0
    k_bob_db: float = 10.0
    k_eve_db: float = 5.0
    scheme: str = "lbb"
    rate: float = 1.0
    psi: float | None = None  # None: optimize
    eve_angle_known: bool = True
    nakagami: NakagamiLinks | None = None
    grid_points: int = 1024
    scan_method: str = "series"
    max_refine: int = 8
    sweep: SweepAxis | None = None
    sweep_schemes: tuple[str, ...] = ("lbb",)
    mc_enabled: bool = False
    trials: int = 1_000_000
    seed: int = 0
    workers: int = 1
    output_format: str = "csv"
    output_path: str | None = None
    kmap_path: str | None = None
    kmap_angle_unit: str = "rad"
    kmap_k_unit: str = "db"
    # unit the angles were written in; values above are always radians
    units: str = field(default="rad", compare=False)

    # -- derived objects ---------------------------------------------------

    def geometry(self) -> SystemGeometry:
        return SystemGeometry(
            PolarLocation(self.distance_bob, self.theta_bob),
            PolarLocation(self.distance_eve, self.theta_eve),
            n_alice=self.n_alice,
            n_eve=self.n_eve,
            carrier_hz=self.carrier_hz,
            pathloss_exp_main=self.pathloss_exp_main,
            pathloss_exp_eve=self.pathloss_exp_eve,
            eve_arrival_angle=self.eve_arrival_angle,
        )

    def k_factors(self) -> tuple[float, float]:
        if self.kmap_path:
            kmap = KFactorMap.from_csv(self.kmap_path, self.kmap_angle_unit, self.kmap_k_unit)
            return (kmap.lookup(self.distance_bob, self.theta_bob).k,
                    kmap.lookup(self.distance_eve, self.theta_eve).k)
        return db_to_linear(self.k_bob_db), db_to_linear(self.k_eve_db)

    def budget(self) -> LinkBudget:
        """Budget whose noise levels give the configured mean SNRs."""
        k_bob, k_eve = self.k_factors()
        return LinkBudget.for_mean_snr(self.geometry(), db_to_linear(self.snr_bob_db),
                                       db_to_linear(self.snr_eve_db), k_bob, k_eve)

    def with_parameter(self, name: str, value: float) -> "RunConfig":
        """Copy with one sweepable parameter set (config units, radians for angles).

        Moving a node keeps the noise levels fixed, so its mean SNR follows
        path loss from the current position.
        """
        if name not in SWEEP_PARAMETERS:
            raise ConfigError(f"[sweep] unknown parameter {name!r}; choose from {', '.join(SWEEP_PARAMETERS)}")
        if name in _DB_PARAMETERS:
            return replace(self, **{f"{name}_db": float(value)})
        if name in ("distance_bob", "distance_eve"):
            budget = self.budget()
            moved = replace(self, **{name: float(value)})
            geom = moved.geometry()
            return replace(moved, snr_bob_db=10.0 * math.log10(budget.mean_snr_bob(geom)),
                           snr_eve_db=10.0 * math.log10(budget.mean_snr_eve(geom)))
        return replace(self, **{name: float(value)})

    def nakagami_links(self, scheme: str) -> tuple[EffectiveNakagami, EffectiveNakagami]:
        """Gamma links for ``scheme`` when ``[nakagami]`` is set.

        LBB uses ``(2 m_B, 3 mean_B)`` for Bob and ``(m_E, mean_E)`` per Eve
        branch; NB splits the mean over ``N_A`` branches and scales Eve's by
        ``lambda0``.
        """
        nk = self.nakagami
        if nk is None:
            raise ConfigError("[nakagami] section is not set")
        snr_b, snr_e = db_to_linear(self.snr_bob_db), db_to_linear(self.snr_eve_db)
        na, ne = self.n_alice, self.n_eve
        if scheme == "lbb":
            return (EffectiveNakagami.from_m(2.0 * nk.m_bob, 3.0 * snr_b, 1),
                    EffectiveNakagami.from_m(nk.m_eve, snr_e, ne))
        if scheme == "nb":
            return (EffectiveNakagami.from_m(nk.m_bob, snr_b / na, na),
                    EffectiveNakagami.from_m(nk.m_eve, snr_e * nk.lambda0 / na, na * ne))
        raise ConfigError(f"scheme {scheme!r} has no [nakagami] mapping (use lbb or nb)")

    def resolved(self) -> dict:
        """Plain-dict view with linear units, for provenance in reports."""
        out = asdict(self)
        k_bob, k_eve = self.k_factors()
        out.update(
            k_bob_linear=k_bob,
            k_eve_linear=k_eve,
            snr_bob_linear=db_to_linear(self.snr_bob_db),
            snr_eve_linear=db_to_linear(self.snr_eve_db),
        )
        return out


# ---------------------------------------------------------------------------
# parsing


def _key_line(path: Path | None, section: str, key: str) -> str:
    if path is None or not path.exists():
        return ""
    current = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]", line)
        if m:
            current = m.group(1).strip().lower()
            continue
        if current == section and re.match(rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
            return f" (line {lineno})"
    return ""


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, path: Path | None):
        self.parser = parser
        self.path = path

    def where(self, section: str, key: str) -> str:
        return f"[{section}] {key}{_key_line(self.path, section, key)}"

    def raw(self, section: str, key: str) -> str | None:
        if not self.parser.has_option(section, key):
            return None
        return self.parser.get(section, key).strip()

    def number(self, section: str, key: str, default=None, kind=float):
        text = self.raw(section, key)
        if text is None or text == "":
            return default
        try:
            value = kind(text)
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: expected {kind.__name__}, got {text!r}") from None
        if kind is float and math.isnan(value):
            raise ConfigError(f"{self.where(section, key)}: NaN is not allowed")
        return value

    def flag(self, section: str, key: str, default: bool) -> bool:
        text = self.raw(section, key)
        if text is None:
            return default
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: expected a boolean, got {text!r}") from None

    def choice(self, section: str, key: str, options, default: str) -> str:
        text = self.raw(section, key)
        if text is None:
            return default
        value = text.lower()
        if value not in options:
            raise ConfigError(f"{self.where(section, key)}: {text!r} not in {', '.join(options)}")
        return value


def _apply_env(parser: configparser.ConfigParser, env: Mapping[str, str]):
    for name, value in env.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        for section in _KNOWN_KEYS:
            if rest.startswith(section + "_"):
                key = rest[len(section) + 1:]
                if key not in _KNOWN_KEYS[section]:
                    raise ConfigError(f"environment {name}: unknown key {key!r} in [{section}]")
                if not parser.has_section(section):
                    parser.add_section(section)
                parser.set(section, key, value)
                break
        else:
            raise ConfigError(f"environment {name}: no section matches")


def parse_config(text: str = "", *, path: str | Path | None = None,
                 env: Mapping[str, str] | None = None, base: RunConfig | None = None) -> RunConfig:
    """Build a :class:`RunConfig` from INI text plus ``RS_`` overrides.

    ``base`` supplies defaults for keys the text leaves out (presets use
    this).  Angles are read in the unit named by ``[geometry] units``,
    which is required whenever an angle key is present.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    src = Path(path) if path is not None else None
    try:
        parser.read_string(text, source=str(src) if src else "<config>")
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]{_key_line(src, section, '')}")
        for key in parser.options(section):
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key [{section}] {key}{_key_line(src, section, key)}")
    _apply_env(parser, os.environ if env is None else env)
    r = _Reader(parser, src)
    cfg = base or RunConfig()

    angle_keys = [("geometry", "theta_bob"), ("geometry", "theta_eve"),
                  ("geometry", "eve_arrival_angle"), ("scheme", "psi")]
    has_angles = any(r.raw(s, k) not in (None, "", "opt") for s, k in angle_keys)
    units_text = r.raw("geometry", "units")
    if units_text is None and has_angles and base is None:
        raise ConfigError("[geometry] units must be declared (deg or rad) when angles are given")
    units = r.choice("geometry", "units", ("deg", "rad"), cfg.units)
    to_rad = math.radians if units == "deg" else float

    def angle(section, key, default):
        v = r.number(section, key, None)
        return default if v is None else to_rad(v)

    updates = dict(
        units=units,
        n_alice=r.number("geometry", "n_alice", cfg.n_alice, int),
        n_eve=r.number("geometry", "n_eve", cfg.n_eve, int),
        theta_bob=angle("geometry", "theta_bob", cfg.theta_bob),
        theta_eve=angle("geometry", "theta_eve", cfg.theta_eve),
        distance_bob=r.number("geometry", "distance_bob", cfg.distance_bob),
        distance_eve=r.number("geometry", "distance_eve", cfg.distance_eve),
        eve_arrival_angle=angle("geometry", "eve_arrival_angle", cfg.eve_arrival_angle),
        carrier_hz=r.number("geometry", "carrier_hz", cfg.carrier_hz),
        pathloss_exp_main=r.number("geometry", "pathloss_exp_main", cfg.pathloss_exp_main),
        pathloss_exp_eve=r.number("geometry", "pathloss_exp_eve", cfg.pathloss_exp_eve),
        snr_bob_db=r.number("budget", "snr_bob", cfg.snr_bob_db),
        snr_eve_db=r.number("budget", "snr_eve", cfg.snr_eve_db),
        k_bob_db=r.number("budget", "k_bob", cfg.k_bob_db),
        k_eve_db=r.number("budget", "k_eve", cfg.k_eve_db),
        scheme=r.choice("scheme", "name", SCHEMES, cfg.scheme),
        rate=r.number("scheme", "rate", cfg.rate),
        eve_angle_known=r.flag("scheme", "eve_angle_known", cfg.eve_angle_known),
        grid_points=r.number("optimize", "grid_points", cfg.grid_points, int),
        scan_method=r.choice("optimize", "scan_method", ("series", "quadrature"), cfg.scan_method),
        max_refine=r.number("optimize", "max_refine", cfg.max_refine, int),
        mc_enabled=r.flag("mc", "enabled", cfg.mc_enabled),
        trials=r.number("mc", "trials", cfg.trials, int),
        seed=r.number("mc", "seed", cfg.seed, int),
        workers=r.number("mc", "workers", cfg.workers, int),
        output_format=r.choice("output", "format", FORMATS, cfg.output_format),
        output_path=r.raw("output", "path") or cfg.output_path,
        kmap_path=r.raw("kmap", "path") or cfg.kmap_path,
        kmap_angle_unit=r.choice("kmap", "angle_unit", ("deg", "rad"), cfg.kmap_angle_unit),
        kmap_k_unit=r.choice("kmap", "k_unit", ("db", "linear"), cfg.kmap_k_unit),
    )
    psi_text = r.raw("scheme", "psi")
    if psi_text is None:
        updates["psi"] = cfg.psi
    elif psi_text.lower() in ("", "opt"):
        updates["psi"] = None
    else:
        updates["psi"] = to_rad(r.number("scheme", "psi"))

    if parser.has_section("nakagami"):
        m_b = r.number("nakagami", "m_bob")
        m_e = r.number("nakagami", "m_eve")
        if m_b is None or m_e is None:
            raise ConfigError("[nakagami] needs both m_bob and m_eve")
        updates["nakagami"] = NakagamiLinks(m_b, m_e, r.number("nakagami", "lambda0", 1.0))

    if parser.has_section("sweep"):
        name = r.raw("sweep", "parameter")
        if not name:
            raise ConfigError("[sweep] parameter is required")
        if "," in name:
            raise ConfigError(f"{r.where('sweep', 'parameter')}: exactly one sweep axis is allowed")
        if name not in SWEEP_PARAMETERS:
            raise ConfigError(f"{r.where('sweep', 'parameter')}: unknown parameter {name!r}")
        start, stop = r.number("sweep", "start"), r.number("sweep", "stop")
        points = r.number("sweep", "points", 11, int)
        if start is None or stop is None:
            raise ConfigError("[sweep] start and stop are required")
        if points < 1:
            raise ConfigError(f"{r.where('sweep', 'points')}: must be >= 1")
        if name in _ANGLE_PARAMETERS:
            start, stop = to_rad(start), to_rad(stop)
        # dB-valued parameters default to even steps in dB
        default_scale = "db" if name in _DB_PARAMETERS else "linear"
        updates["sweep"] = SweepAxis(name, start, stop, points,
                                     r.choice("sweep", "scale", ("linear", "db"), default_scale))
        schemes = r.raw("sweep", "schemes")
        if schemes:
            names = tuple(s.strip().lower() for s in schemes.split(",") if s.strip())
            bad = [s for s in names if s not in SCHEMES]
            if bad:
                raise ConfigError(f"{r.where('sweep', 'schemes')}: unknown scheme(s) {', '.join(bad)}")
            updates["sweep_schemes"] = names
        else:
            updates["sweep_schemes"] = (updates["scheme"],)

    out = replace(cfg, **updates)
    _validate(out)
    return out


def _validate(cfg: RunConfig):
    if cfg.n_alice < 1 or cfg.n_eve < 1:
        raise ConfigError("[geometry] n_alice and n_eve must be >= 1")
    if cfg.distance_bob <= 0 or cfg.distance_eve <= 0:
        raise ConfigError("[geometry] distances must be > 0")
    if cfg.rate < 0:
        raise ConfigError("[scheme] rate must be >= 0")
    if cfg.trials < 1:
        raise ConfigError("[mc] trials must be >= 1")
    if cfg.grid_points < 3:
        raise ConfigError("[optimize] grid_points must be >= 3")
    if cfg.psi is not None and not 0.0 <= cfg.psi <= math.pi:
        raise ConfigError("[scheme] psi must lie in [0, pi]")


def load_config(path: str | Path, env: Mapping[str, str] | None = None,
                base: RunConfig | None = None) -> RunConfig:
    """Read and parse a config file; a missing or unreadable file raises ``OSError``."""
    p = Path(path)
    return parse_config(p.read_text(), path=p, env=env, base=base)


def config_to_ini(cfg: RunConfig) -> str:
    """Serialize to INI (radians, dB) so :func:`parse_config` restores ``cfg`` exactly."""
    lines = ["[geometry]", "units = rad"]
    for key in ("n_alice", "n_eve", "theta_bob", "theta_eve", "distance_bob", "distance_eve",
                "eve_arrival_angle", "carrier_hz", "pathloss_exp_main", "pathloss_exp_eve"):
        v = getattr(cfg, key)
        if v is not None:
            lines.append(f"{key} = {v!r}")
    lines += ["[budget]", f"snr_bob = {cfg.snr_bob_db!r}", f"snr_eve = {cfg.snr_eve_db!r}",
              f"k_bob = {cfg.k_bob_db!r}", f"k_eve = {cfg.k_eve_db!r}"]
    lines += ["[scheme]", f"name = {cfg.scheme}", f"rate = {cfg.rate!r}",
              f"psi = {'opt' if cfg.psi is None else repr(cfg.psi)}",
              f"eve_angle_known = {str(cfg.eve_angle_known).lower()}"]
    if cfg.nakagami is not None:
        nk = cfg.nakagami
        lines += ["[nakagami]", f"m_bob = {nk.m_bob!r}", f"m_eve = {nk.m_eve!r}", f"lambda0 = {nk.lambda0!r}"]
    lines += ["[optimize]", f"grid_points = {cfg.grid_points}", f"scan_method = {cfg.scan_method}",
              f"max_refine = {cfg.max_refine}"]
    if cfg.sweep is not None:
        sw = cfg.sweep
        lines += ["[sweep]", f"parameter = {sw.parameter}", f"start = {sw.start!r}", f"stop = {sw.stop!r}",
                  f"points = {sw.points}", f"scale = {sw.scale}", f"schemes = {','.join(cfg.sweep_schemes)}"]
    lines += ["[mc]", f"enabled = {str(cfg.mc_enabled).lower()}", f"trials = {cfg.trials}",
              f"seed = {cfg.seed}", f"workers = {cfg.workers}"]
    lines += ["[output]", f"format = {cfg.output_format}"]
    if cfg.output_path:
        lines.append(f"path = {cfg.output_path}")
    if cfg.kmap_path:
        lines += ["[kmap]", f"path = {cfg.kmap_path}", f"angle_unit = {cfg.kmap_angle_unit}",
                  f"k_unit = {cfg.kmap_k_unit}"]
    return "\n".join(lines) + "\n"
