"""CSV, JSON and SVG writers for command reports.

CSV files start with ``#`` lines holding the INI config that produced them,
then a header row.  Floats are written with 17 significant digits in
scientific notation, which round-trips exactly through ``float``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Iterable

from .config import ConfigError, RunConfig, config_to_ini, parse_config

CONFIG_MARK = "# config: "


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".16e")
    if v is None:
        return ""
    return str(v)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif not isinstance(v, list):
            out[key] = v
    return out


def report_rows(report: dict) -> list[dict]:
    """Table form of a report: sweep rows, optimize minima, or one flattened row."""
    if report.get("command") == "sweep":
        return report["rows"]
    if report.get("command") == "optimize":
        return [dict(m, psi_star=report["psi_star"], outage_min=report["outage_min"],
                     analytic_case=report["analytic_case"]) for m in report["local_minima"]]
    body = {k: v for k, v in report.items() if k not in ("config", "version", "seed")}
    return [_flatten(body)]


def render_csv(rows: Iterable[dict], cfg: RunConfig | None = None, version: str = "") -> str:
    rows = list(rows)
    buf = io.StringIO()
    if version:
        buf.write(f"# ricianlbb {version}\n")
    if cfg is not None:
        for line in config_to_ini(cfg).splitlines():
            buf.write(CONFIG_MARK + line + "\n")
    header: list[str] = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([format_value(r.get(k)) for k in header])
    return buf.getvalue()


def read_csv(path: str | Path) -> tuple[RunConfig | None, list[str], list[list[str]]]:
    """Parse a CSV written by :func:`render_csv` back into (config, header, rows)."""
    text = Path(path).read_text()
    ini, body = [], []
    for line in text.splitlines():
        if line.startswith(CONFIG_MARK):
            ini.append(line[len(CONFIG_MARK):])
        elif not line.startswith("#"):
            body.append(line)
    cfg = parse_config("\n".join(ini) + "\n", env={}) if ini else None
    table = list(csv.reader(body))
    return cfg, table[0], table[1:]


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, default=_json_default, allow_nan=True) + "\n"


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def render_svg(series: dict[str, tuple[list[float], list[float]]], *, xlabel: str, ylabel: str,
               logy: bool = True, markers: dict[str, tuple[list[float], list[float], list[float]]] | None = None,
               title: str = "") -> str:
    """Static line chart; ``markers`` holds ``(x, y, ci)`` scatter overlays."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, (x, y) in series.items():
        if logy:
            x, y = zip(*[(a, b) for a, b in zip(x, y) if b > 0]) if any(b > 0 for b in y) else ([], [])
        ax.plot(x, y, label=label)
    for label, (x, y, ci) in (markers or {}).items():
        pts = [(a, b, c) for a, b, c in zip(x, y, ci) if (b > 0 or not logy) and not math.isnan(b)]
        if pts:
            xs, ys, cs = zip(*pts)
            ax.errorbar(xs, ys, yerr=cs, fmt="o", markersize=4, fillstyle="none", label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def sweep_svg(report: dict, title: str = "") -> str:
    rows = report["rows"]
    if not rows:
        raise ConfigError("nothing to plot: the sweep produced no rows")
    series, markers = {}, {}
    for r in rows:
        x, y = series.setdefault(r["scheme"], ([], []))
        x.append(r["value"])
        y.append(r["outage"])
        if "mc_outage" in r:
            mx, my, mc = markers.setdefault(f"{r['scheme']} (MC)", ([], [], []))
            mx.append(r["value"])
            my.append(r["mc_outage"])
            mc.append(r["mc_ci95"])
    return render_svg(series, xlabel=rows[0]["parameter"], ylabel="secrecy outage probability",
                      markers=markers, title=title)


def write_report(report: dict, cfg: RunConfig, fmt: str, path: str | None):
    if fmt == "json":
        text = render_json(report)
    elif fmt == "csv":
        text = render_csv(report_rows(report), cfg, report.get("version", ""))
    elif fmt == "svg":
        if report.get("command") != "sweep":
            raise ConfigError("svg output is only available for sweep")
        text = sweep_svg(report)
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)
