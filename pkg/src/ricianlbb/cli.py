"""Command-line front end: eval, optimize, sweep, mc and repro.

Each ``cmd_*`` function takes a :class:`~ricianlbb.config.RunConfig` and
returns plain dicts, so the same reports serve the CLI, scripts and tests.

Exit codes: 0 success, 2 config error, 3 numeric non-convergence, 4 I/O.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .analytic import (
    QuadratureError,
    SchemeParams,
    SecrecyResult,
    diversity_order,
    outage_series,
    pnon_series,
    scheme_csi,
    scheme_lbb,
    scheme_nb,
)
from .channel import Beamformer, EffectiveNakagami
from .config import SCHEMES, ConfigError, RunConfig, load_config, parse_config
from .montecarlo import TrialBatch, estimate, estimate_nakagami
from .optimizer import OptimizeOptions, OptimizeResult, optimize_psi
from .output import write_report

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def optimize_options(cfg: RunConfig) -> OptimizeOptions:
    return OptimizeOptions(grid_points=cfg.grid_points, max_refine=cfg.max_refine,
                           scan_method=cfg.scan_method, eve_angle_known=cfg.eve_angle_known)


def run_optimizer(cfg: RunConfig) -> OptimizeResult:
    return optimize_psi(cfg.geometry(), cfg.budget(), cfg.rate, optimize_options(cfg))


def scheme_params(cfg: RunConfig, scheme: str, psi: float | None = None) -> SchemeParams:
    """Gamma-link parameters for ``scheme``; LBB needs ``psi`` unless links are given directly."""
    if cfg.nakagami is not None:
        main, eve = cfg.nakagami_links(scheme)
        return SchemeParams(main, eve, cfg.rate, scheme)
    geom, budget = cfg.geometry(), cfg.budget()
    if scheme == "lbb":
        if psi is None:
            raise ValueError("lbb needs a beam direction")
        return scheme_lbb(geom, budget, Beamformer.steer(psi, geom), cfg.rate)
    if scheme == "nb":
        return scheme_nb(geom, budget, cfg.rate)
    if scheme == "csi":
        return scheme_csi(geom, budget, cfg.rate)
    raise ConfigError(f"unknown scheme {scheme!r}")


def _resolve_psi(cfg: RunConfig, scheme: str) -> tuple[float | None, OptimizeResult | None]:
    if scheme != "lbb" or cfg.nakagami is not None:
        return None, None
    if cfg.psi is not None:
        return cfg.psi, None
    opt = run_optimizer(cfg)
    return opt.psi_star, opt


def _link(e: EffectiveNakagami) -> dict:
    return {"k_eff": e.k_eff, "m": e.m, "mean_snr": e.mean_snr, "branches": e.branches,
            "shape": e.shape, "rate": e.rate}


def _diagnostics(r: SecrecyResult) -> dict:
    return {"method": r.method, "converged": r.converged, "terms_n": r.terms_used_n,
            "terms_l": r.terms_used_l, "residual_estimate": r.residual_estimate,
            "cancellation": r.cancellation, "raw_value": r.raw_value, "note": r.note}


def _batch(b: TrialBatch) -> dict:
    return asdict(b)


def run_mc(cfg: RunConfig, scheme: str, psi: float | None, seed: int, workers: int = 1) -> TrialBatch:
    if cfg.nakagami is not None:
        p = scheme_params(cfg, scheme)
        return estimate_nakagami(p.main, p.eve, cfg.rate, cfg.trials, seed, workers, scheme=scheme)
    geom = cfg.geometry()
    beam = Beamformer.steer(psi, geom) if scheme == "lbb" else None
    return estimate(scheme, geom, cfg.budget(), beam, cfg.rate, cfg.trials, seed, workers)


def _provenance(cfg: RunConfig) -> dict:
    return {"version": __version__, "seed": cfg.seed, "config": cfg.resolved()}


def cmd_eval(cfg: RunConfig, scheme: str | None = None) -> dict:
    """Outage, P_non, effective links and diagnostics for one scheme."""
    scheme = scheme or cfg.scheme
    psi, opt = _resolve_psi(cfg, scheme)
    p = scheme_params(cfg, scheme, psi)
    out = outage_series(p)
    pnon = pnon_series(p)
    report = {
        "command": "eval",
        "scheme": scheme,
        "rate": cfg.rate,
        "psi": psi,
        "psi_deg": None if psi is None else math.degrees(psi),
        "outage": out.value,
        "pnon": pnon.value,
        "main": _link(p.main),
        "eve": _link(p.eve),
        "diversity_order": diversity_order(p.main),
        "diagnostics": {"outage": _diagnostics(out), "pnon": _diagnostics(pnon)},
        **_provenance(cfg),
    }
    if opt is not None:
        report["analytic_case"] = opt.analytic_case
    if cfg.mc_enabled:
        report["mc"] = _batch(run_mc(cfg, scheme, psi, cfg.seed, cfg.workers))
    return report


def cmd_optimize(cfg: RunConfig) -> dict:
    """Optimal beam direction with the refined local-minima table."""
    if cfg.nakagami is not None:
        raise ConfigError("optimize needs a Rician geometry; remove the [nakagami] section")
    opt = run_optimizer(cfg)
    return {
        "command": "optimize",
        "psi_star": opt.psi_star,
        "psi_star_deg": opt.psi_star_deg,
        "outage_min": opt.outage_min,
        "analytic_case": opt.analytic_case,
        "evaluations": opt.evaluations,
        "local_minima": [{"psi": x, "psi_deg": math.degrees(x), "outage": v} for x, v in opt.candidates],
        "diagnostics": _diagnostics(opt.result) if opt.result else None,
        **_provenance(cfg),
    }


def sweep_point(cfg: RunConfig, index: int, value: float, schemes: Sequence[str]) -> list[dict]:
    """Rows for one sweep value; MC seeds are ``seed + index``."""
    point = cfg.with_parameter(cfg.sweep.parameter, value)
    rows = []
    for scheme in schemes:
        psi, _ = _resolve_psi(point, scheme)
        p = scheme_params(point, scheme, psi)
        out = outage_series(p)
        pnon = pnon_series(p)
        row = {"index": index, "parameter": cfg.sweep.parameter, "value": float(value), "scheme": scheme,
               "psi": psi if psi is not None else math.nan, "outage": out.value, "pnon": pnon.value,
               "method": out.method, "converged": out.converged}
        if cfg.mc_enabled:
            b = run_mc(point, scheme, psi, cfg.seed + index)
            row.update(mc_outage=b.estimate_outage, mc_ci95=b.ci_halfwidth_95, mc_pnon=b.estimate_pnon)
        rows.append(row)
    return rows


def _sweep_task(args):
    return sweep_point(*args)


def cmd_sweep(cfg: RunConfig) -> dict:
    """One row per sweep value per scheme, ordered by sweep index."""
    if cfg.sweep is None:
        raise ConfigError("sweep needs a [sweep] section")
    values = cfg.sweep.values()
    tasks = [(cfg, i, float(v), cfg.sweep_schemes) for i, v in enumerate(values)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_sweep_task, tasks))
    else:
        chunks = [_sweep_task(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    return {"command": "sweep", "rows": rows, **_provenance(cfg)}


def cmd_mc(cfg: RunConfig, scheme: str | None = None) -> dict:
    """Monte Carlo estimate next to the analytic value for one scheme."""
    scheme = scheme or cfg.scheme
    psi, _ = _resolve_psi(cfg, scheme)
    b = run_mc(cfg, scheme, psi, cfg.seed, cfg.workers)
    p = scheme_params(cfg, scheme, psi)
    analytic = outage_series(p).value
    sigma = b.sigma_outage
    return {
        "command": "mc",
        "scheme": scheme,
        "psi": psi,
        "mc": _batch(b),
        "analytic_outage": analytic,
        "deviation": b.estimate_outage - analytic,
        "deviation_sigmas": (b.estimate_outage - analytic) / sigma if sigma > 0 else None,
        **_provenance(cfg),
    }


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ricianlbb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--out", help="output path (stdout when omitted)")
        if fmt:
            p.add_argument("--format", choices=("csv", "json", "svg"))
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--scheme", choices=SCHEMES)
        p.add_argument("--workers", type=int)

    common(sub.add_parser("eval", help="evaluate outage and P_non"))
    common(sub.add_parser("optimize", help="search the beam direction"))
    common(sub.add_parser("sweep", help="evaluate along one parameter axis"))
    mc = sub.add_parser("mc", help="Monte Carlo estimate")
    common(mc)
    repro = sub.add_parser("repro", help="regenerate a figure preset")
    repro.add_argument("figure", choices=("fig2", "fig3", "fig4", "fig5"))
    repro.add_argument("--out", default=".", help="output directory")
    repro.add_argument("--trials", type=int)
    repro.add_argument("--seed", type=int)
    repro.add_argument("--no-mc", action="store_true", help="skip Monte Carlo markers")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else parse_config("")
    updates = {}
    if getattr(args, "trials", None) is not None:
        if args.trials < 1:
            raise ConfigError("--trials must be >= 1")
        updates["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "scheme", None):
        updates["scheme"] = args.scheme
        if cfg.sweep is not None:
            updates["sweep_schemes"] = (args.scheme,)
    if getattr(args, "workers", None) is not None:
        updates["workers"] = args.workers
    if getattr(args, "format", None):
        updates["output_format"] = args.format
    if getattr(args, "out", None):
        updates["output_path"] = args.out
    return replace(cfg, **updates)


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "repro":
            from .presets import run_preset

            files = run_preset(args.figure, Path(args.out), trials=args.trials, seed=args.seed,
                               with_mc=not args.no_mc)
            for f in files:
                print(f)
            return EXIT_OK
        cfg = config_from_args(args)
        if args.command == "eval":
            report = cmd_eval(cfg)
        elif args.command == "optimize":
            report = cmd_optimize(cfg)
        elif args.command == "sweep":
            report = cmd_sweep(cfg)
        else:
            report = cmd_mc(cfg)
        write_report(report, cfg, cfg.output_format, cfg.output_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
