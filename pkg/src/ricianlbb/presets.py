"""Figure presets: fixed configurations whose sweeps regenerate each plot.

Values the figure captions leave open are set here and listed in the
README: Eve's mean SNR (5 dB for fig2 and fig3, 0 dB for fig5), Bob's
direction in fig4 (pi/3) and the Bob SNR axis (0 to 20 dB).
"""
from __future__ import annotations

import math
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analytic import outage_series, scheme_nb
from .cli import cmd_sweep, optimize_options
from .config import NakagamiLinks, RunConfig, SweepAxis
from .optimizer import average_optimal_outage, average_outage_no_eve_location
from .output import render_csv, render_svg, sweep_svg

FIGURES = ("fig2", "fig3", "fig4", "fig5")
SNR_AXIS = SweepAxis("snr_bob", 0.0, 20.0, 9, "db")
# each theta_E draw is averaged over this many uniform points on [0, 2 pi)
FIG5_ANGLE_POINTS = 72


def preset_config(figure: str, trials: int | None = None, seed: int | None = None,
                  with_mc: bool = True) -> RunConfig:
    base = RunConfig(rate=1.0, mc_enabled=with_mc, scan_method="quadrature", grid_points=1024)
    if figure == "fig2":
        cfg = replace(base, n_alice=3, n_eve=2, snr_eve_db=5.0, sweep=SNR_AXIS, sweep_schemes=("lbb", "nb"),
                      nakagami=NakagamiLinks(m_bob=1.35, m_eve=1.33, lambda0=0.85))
    elif figure == "fig3":
        cfg = replace(base, n_alice=3, n_eve=2, k_bob_db=10.0, k_eve_db=5.0, theta_bob=math.pi / 3,
                      theta_eve=math.pi / 4, snr_eve_db=5.0, sweep=SNR_AXIS, sweep_schemes=("lbb", "nb", "csi"))
    elif figure == "fig4":
        cfg = replace(base, n_alice=2, n_eve=2, k_bob_db=10.0, k_eve_db=10.0, snr_bob_db=10.0, snr_eve_db=10.0,
                      theta_bob=math.pi / 3, sweep=SweepAxis("theta_eve", 0.0, math.pi, 181),
                      sweep_schemes=("lbb",), mc_enabled=False, grid_points=256)
    elif figure == "fig5":
        cfg = replace(base, n_alice=3, n_eve=4, k_bob_db=10.0, k_eve_db=5.0, theta_bob=math.pi / 3,
                      snr_eve_db=0.0, sweep=SNR_AXIS, sweep_schemes=("nb",), mc_enabled=False, grid_points=256)
    else:
        raise ValueError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    if trials is not None:
        cfg = replace(cfg, trials=trials)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def fig5_rows(cfg: RunConfig, points: int = FIG5_ANGLE_POINTS) -> list[dict]:
    """Eve-direction averages with and without Eve's location, plus NB."""
    rows = []
    opts = optimize_options(cfg)
    for i, snr_db in enumerate(cfg.sweep.values()):
        point = cfg.with_parameter("snr_bob", float(snr_db))
        geom, budget = point.geometry(), point.budget()
        rows.append({
            "index": i,
            "snr_bob": float(snr_db),
            "avg_outage_no_eve_location": average_outage_no_eve_location(geom, budget, cfg.rate, points),
            "avg_outage_optimal": average_optimal_outage(geom, budget, cfg.rate, points, opts),
            "outage_nb": outage_series(scheme_nb(geom, budget, cfg.rate)).value,
        })
    return rows


def run_preset(figure: str, outdir: Path, trials: int | None = None, seed: int | None = None,
               with_mc: bool = True) -> list[Path]:
    """Write ``<figure>.csv`` and ``<figure>.svg`` into ``outdir``."""
    cfg = preset_config(figure, trials, seed, with_mc)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = outdir / f"{figure}.csv", outdir / f"{figure}.svg"
    if figure == "fig5":
        rows = fig5_rows(cfg)
        x = [r["snr_bob"] for r in rows]
        svg = render_svg({
            "no Eve location (avg)": (x, [r["avg_outage_no_eve_location"] for r in rows]),
            "optimal psi (avg)": (x, [r["avg_outage_optimal"] for r in rows]),
            "NB": (x, [r["outage_nb"] for r in rows]),
        }, xlabel="mean SNR at Bob (dB)", ylabel="secrecy outage probability", title=figure)
    else:
        report = cmd_sweep(cfg)
        rows = report["rows"]
        svg = sweep_svg(report, title=figure)
    csv_path.write_text(render_csv(rows, cfg, __version__))
    svg_path.write_text(svg)
    return [csv_path, svg_path]
