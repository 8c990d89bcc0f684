"""Secrecy outage and non-zero secrecy capacity in closed form.

Every scheme reduces to the same pair of gamma-distributed SNRs,

    gamma_B ~ Gamma(shape a, rate beta),   gamma_E ~ Gamma(shape b, rate eps),

with ``a = main.branches * main.m``, ``beta = main.m / main.mean_snr`` and
likewise for Eve.  The outage ``Pr(C_s < R_s)`` is evaluated as

* a double series over ``n`` (expansion of the incomplete gamma function)
  and ``l`` (binomial expansion of ``(1 + (2^R - 1)/(2^R x))^(a+n)``), plus a
  complementary term that the binomial expansion misses whenever ``a`` is
  not an integer, or
* adaptive quadrature of the defining single integral (the ground truth).

Series terms are composed as log-magnitude and sign and exponentiated once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate, special

from .channel import (
    Beamformer,
    EffectiveNakagami,
    LinkBudget,
    SystemGeometry,
    effective_csi_eve,
    effective_eve,
    effective_main,
    lambda0_mean,
)
from .specfun import log_gamma_generalized

Method = Literal["series", "quadrature"]
_CHUNK = 16


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach its error target."""


@dataclass(frozen=True)
class Truncation:
    """Series truncation policy.

    With ``adaptive=True`` a sum stops once ``patience`` consecutive terms
    each change it by less than ``rel_tol`` (relative); ``n_max``/``l_max``
    are hard caps.  With ``adaptive=False`` exactly ``n_max`` x ``l_max``
    terms are summed.
    """

    n_max: int = 500
    l_max: int = 500
    rel_tol: float = 1e-12
    patience: int = 5
    adaptive: bool = True
    max_cancellation: float = 1e7


DEFAULT_TRUNCATION = Truncation()


@dataclass(frozen=True)
class SchemeParams:
    main: EffectiveNakagami
    eve: EffectiveNakagami
    rate: float
    scheme: str = "lbb"

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError(f"target secrecy rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class SecrecyResult:
    value: float
    terms_used_n: int
    terms_used_l: int
    converged: bool
    method: Method
    residual_estimate: float
    raw_value: float = math.nan
    cancellation: float = 1.0
    note: str = ""
    extra: dict = field(default_factory=dict, compare=False)


# --------------------------------------------------------------------------
# series kernel


def _signed_logsum(logs: np.ndarray, signs: np.ndarray) -> tuple[float, float]:
    """Return ``(scale, scaled_sum)`` with ``sum = scaled_sum * exp(scale)``."""
    if logs.size == 0 or not np.any(signs):
        return 0.0, 0.0
    scale = float(np.max(logs[signs != 0]))
    return scale, float(np.sum(signs * np.exp(logs - scale)))


class _Accumulator:
    """Running signed sum kept as ``value * exp(scale)``."""

    def __init__(self):
        self.scale = -math.inf
        self.value = 0.0

    def add(self, scale: float, value: float):
        if value == 0.0:
            return
        if scale > self.scale:
            self.value = self.value * math.exp(self.scale - scale) if self.value else 0.0
            self.scale = scale
            self.value += value
        else:
            self.value += value * math.exp(scale - self.scale)

    @property
    def log_abs(self) -> float:
        return math.log(abs(self.value)) + self.scale if self.value else -math.inf

    def __float__(self) -> float:
        return float(self.value * math.exp(self.scale)) if self.value else 0.0


def _stop_index(terms: np.ndarray, partial: np.ndarray, rel_tol: float, patience: int) -> int | None:
    """First index ``i`` such that terms ``i-patience+1..i`` are all negligible."""
    small = np.abs(terms) <= rel_tol * np.abs(partial)
    if patience <= 1:
        hits = np.flatnonzero(small)
        return int(hits[0]) if hits.size else None
    run = np.convolve(small.astype(np.int64), np.ones(patience, dtype=np.int64), mode="full")[: small.size]
    hits = np.flatnonzero(run >= patience)
    return int(hits[0]) if hits.size else None


def _log_gamma_generalized_vec(s: np.ndarray, needed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    logs = special.gammaln(s)
    signs = special.gammasgn(s)
    neg_int = (s <= 0) & (s == np.floor(s)) & needed
    for idx in np.flatnonzero(neg_int):
        lv = log_gamma_generalized(float(s.flat[idx]))
        logs.flat[idx] = lv.log_magnitude
        signs.flat[idx] = lv.sign
    return logs, signs


def _log_binomial_vec(alpha: np.ndarray, l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log|C(alpha, l)| and its sign for ``alpha > -1``."""
    tail = alpha - l + 1.0
    zero = (tail <= 0) & (tail == np.floor(tail))
    safe_tail = np.where(zero, 0.5, tail)
    logs = special.gammaln(alpha + 1.0) - special.gammaln(l + 1.0) - special.gammaln(safe_tail)
    signs = special.gammasgn(safe_tail)
    signs = np.where(zero, 0.0, signs)
    logs = np.where(zero, -np.inf, logs)
    return logs, signs


def _reduce_rows(logs: np.ndarray, signs: np.ndarray, trunc: Truncation, adaptive_l: bool,
                 l_floor: np.ndarray | None = None):
    """Sum each row of a block of l-terms, stopping per row like :func:`_stop_index`.

    A row may not stop before column ``l_floor[row]``.
    Returns per-row ``(scale, value, stop, max_log, full_value)``; ``stop`` is
    ``-1`` for rows that never settle (``value`` is then meaningless and
    ``full_value`` holds the sum over the whole row).  ``max_log`` is the log of
    the largest term or partial-sum magnitude up to ``stop``.
    """
    nz = signs != 0
    any_nz = nz.any(axis=1)
    masked = np.where(nz, logs, -np.inf)
    scale = np.where(any_nz, masked.max(axis=1), 0.0)
    with np.errstate(invalid="ignore", over="ignore"):
        terms = np.where(nz, signs * np.exp(logs - scale[:, None]), 0.0)
    partial = np.cumsum(terms, axis=1)
    width = terms.shape[1]
    if adaptive_l:
        small = (np.abs(terms) <= trunc.rel_tol * np.abs(partial)).astype(np.int64)
        cs = np.cumsum(small, axis=1)
        k = max(trunc.patience, 1)
        run = cs.copy()
        run[:, k:] -= cs[:, :-k]
        hit = run >= k
        if l_floor is not None:
            hit &= np.arange(width)[None, :] >= l_floor[:, None]
        found = hit.any(axis=1)
        stop = np.where(found, hit.argmax(axis=1), -1)
    else:
        stop = np.full(terms.shape[0], width - 1)
    idx = np.where(stop >= 0, stop, width - 1)
    rows = np.arange(terms.shape[0])
    value = np.where(any_nz, partial[rows, idx], 0.0)
    full = np.where(any_nz, partial[:, -1], 0.0)
    upto = np.arange(width)[None, :] <= idx[:, None]
    peak_term = np.where(upto, masked, -np.inf).max(axis=1)
    with np.errstate(divide="ignore"):
        peak_partial = np.log(np.where(upto, np.abs(partial), 0.0).max(axis=1)) + scale
    row_max = np.where(any_nz, np.maximum(peak_term, peak_partial), -np.inf)
    stop = np.where(any_nz, stop, 0)
    return scale, value, stop, row_max, full


@dataclass
class _SeriesOutcome:
    value: float
    n_used: int
    l_used: int
    converged: bool
    cancellation: float
    residual: float
    note: str = ""


def _double_series(a, beta, b, eps, rate, trunc: Truncation,
                         offset: float = 0.0) -> tuple[_Accumulator, int, int, bool, float, float, str]:
    """Double series over ``n`` and ``l``.

    ``offset`` is added to the running total when judging whether a row is
    negligible, so the n-stop is relative to the final value even when the
    partial sums cancel against it.
    """
    c = 2.0 ** rate
    d = c - 1.0
    p = eps + beta * c
    z = d / c
    base = b * math.log(eps) - math.lgamma(b) - beta * d
    log_bc = math.log(beta * c)
    log_p = math.log(p)
    log_z = math.log(z) if d > 0 else -math.inf

    l_cap = trunc.l_max - 1 if d > 0 else 0
    total = _Accumulator()
    max_log = -math.inf
    n_used = 0
    l_used = 0
    quiet = 0
    last_row = 0.0
    rows_converged = True
    note = ""
    n_stop = trunc.n_max
    # incomplete-gamma weights peak near a + n ~ beta (c (1 + E[gamma_E]) - 1);
    # quiet rows before that point are the growth phase, not the tail
    n_min = max(0.0, beta * (c * (1.0 + b / eps) - 1.0) - a)
    # rows keep contributing until Eve's upper tail is covered
    x_hi = float(special.gammainccinv(b, trunc.rel_tol)) / eps
    n_need = beta * (c * (1.0 + x_hi) - 1.0) - a
    if trunc.adaptive and n_need >= trunc.n_max:
        return total, 0, 0, False, max_log, 0.0, f"n-series needs more than {trunc.n_max} terms (tail near n={n_need:.0f})"

    # past l = a + b + n the gamma argument turns negative and the terms
    # regrow into a Poisson-like bulk near l - (a + b + n) ~ y = p z; rows may
    # not stop before that bulk, and wider rows are only built when a row
    # fails to settle
    y = p * z
    l_bulk = y + 10.0 * math.sqrt(y)
    l_pad = l_bulk + 40.0
    n0 = 0
    widen = False
    while n0 < n_stop:
        n = np.arange(n0, min(n0 + _CHUNK, n_stop), dtype=float)
        width = l_cap if widen else min(l_cap, int(math.ceil(a + b + n[-1] + l_pad)))
        l = np.arange(width + 1, dtype=float)
        alpha = a + n[:, None]
        s = a + b + n[:, None] - l[None, :]
        lb, sb = _log_binomial_vec(alpha, l[None, :])
        pole = s == 0
        if np.any(pole & (sb != 0)):
            raise ArithmeticError("series hits the gamma pole at zero argument")
        lg, sg = _log_gamma_generalized_vec(np.where(pole, 1.0, s), sb != 0)
        lg = np.where(sb != 0, lg, 0.0)
        sg = np.where(sb != 0, sg, 0.0)
        with np.errstate(invalid="ignore"):
            log_l = np.where(l[None, :] > 0, l[None, :] * log_z, 0.0)
        logs = (base + alpha * log_bc - special.gammaln(alpha + 1.0)) + lb + log_l + lg - s * log_p
        signs = sb * sg
        logs = np.where(signs == 0, -np.inf, logs)
        l_floor = np.ceil(a + b + n + l_bulk) if d > 0 else None
        rows = _reduce_rows(logs, signs, trunc, adaptive_l=trunc.adaptive and width > 0, l_floor=l_floor)
        restart = None
        for i in range(n.size):
            row_scale, row_val, stop, row_max = rows[0][i], rows[1][i], rows[2][i], rows[3][i]
            if stop < 0:
                if width < l_cap:
                    restart = int(n[i])
                    break
                rows_converged = False
                note = f"l-series did not settle within {l_cap + 1} terms at n={int(n[i])}"
                stop = width
                row_val = rows[4][i]
            max_log = max(max_log, row_max)
            if total.value:
                max_log = max(max_log, total.log_abs)
            l_used = max(l_used, int(stop) + 1)
            total.add(row_scale, row_val)
            n_used = int(n[i]) + 1
            last_row = row_val * math.exp(row_scale) if row_val else 0.0
            if trunc.adaptive:
                row_log = math.log(abs(row_val)) + row_scale if row_val else -math.inf
                running = abs(float(total) + offset)
                ref = max(running, abs(float(total)) / trunc.max_cancellation)
                gap = row_log - (math.log(ref) if ref > 0 else total.log_abs)
                if gap <= math.log(trunc.rel_tol) and n_used > n_min:
                    quiet += 1
                else:
                    quiet = 0
                if quiet >= trunc.patience:
                    n_stop = n_used
                    break
        if restart is not None:
            n0, widen = restart, True
            continue
        n0 += _CHUNK
    n_converged = not trunc.adaptive or quiet >= trunc.patience
    if not n_converged:
        note = note or f"n-series did not settle within {trunc.n_max} terms"
    return total, n_used, l_used, rows_converged and n_converged, max_log, abs(last_row), note


def _complement(a, beta, b, eps, rate, n_max: int) -> tuple[float, float, float]:
    """Term dropped by the termwise binomial expansion for non-integer ``a``.

    The n-sum runs to at most ``n_max`` terms; its terms fall off like
    ``(beta d)^n / n!`` so fewer are used when ``beta d`` is small.
    Returns ``(value, log of largest term magnitude, last-term magnitude)``.
    """
    c = 2.0 ** rate
    d = c - 1.0
    if d == 0.0 or float(a).is_integer():
        return 0.0, -math.inf, 0.0
    s_ab = math.sin(math.pi * (a + b))
    if abs(s_ab) < 1e-8:
        raise ArithmeticError("a + b is (nearly) an integer; series is degenerate")
    ratio = math.sin(math.pi * a) / s_ab
    p = eps + beta * c
    z = d / c
    y = p * z
    base = b * math.log(eps) - beta * d + b * math.log(z) + math.log(abs(ratio)) - math.lgamma(b)
    k_cap = int(math.ceil(y + 12.0 * math.sqrt(y) + 60.0))
    if k_cap > 20_000:
        raise ArithmeticError(f"complement series too long (argument {y:.3g})")
    k = np.arange(k_cap + 1, dtype=float)
    log_k = special.gammaln(b + k) - special.gammaln(k + 1.0) + np.where(k > 0, k * math.log(y), 0.0)
    bd = beta * d
    n = np.arange(min(n_max, int(math.ceil(bd + 12.0 * math.sqrt(bd) + 60.0))), dtype=float)
    log_n = (a + n) * math.log(bd)
    logs = base + log_n[:, None] + log_k[None, :] - special.gammaln(a + b + n[:, None] + 1.0 + k[None, :])
    scale = float(np.max(logs))
    val = float(np.sum(np.exp(logs - scale))) * math.exp(scale)
    last = float(np.exp(np.max(logs[-1]))) + float(np.exp(np.max(logs[:, -1])))
    return math.copysign(val, ratio), scale, last


def _series_kernel(a, beta, b, eps, rate, trunc: Truncation, complement: bool) -> _SeriesOutcome:
    comp, comp_log, comp_last = _complement(a, beta, b, eps, rate, trunc.n_max) if complement else (0.0, -math.inf, 0.0)
    total, n_used, l_used, ok, max_log, last, note = _double_series(a, beta, b, eps, rate, trunc, comp)
    value = float(total)
    if complement:
        value += comp
        max_log = max(max_log, comp_log, math.log(abs(comp)) if comp else -math.inf)
        last += comp_last
    if value > 0:
        cancellation = math.exp(min(max_log - math.log(value), 700.0))
    else:
        cancellation = math.inf
    return _SeriesOutcome(value, n_used, l_used, ok, cancellation, last, note)


def _shapes(p: SchemeParams) -> tuple[float, float, float, float]:
    return p.main.shape, p.main.rate, p.eve.shape, p.eve.rate


def outage_series(p: SchemeParams, trunc: Truncation = DEFAULT_TRUNCATION, *,
                  complement: bool = True, fallback: bool = True) -> SecrecyResult:
    """Secrecy outage probability from the closed-form double series.

    If the series does not settle, cancels too much, or leaves ``[0, 1]``,
    the result is recomputed by :func:`outage_quadrature` and flagged
    ``converged=False``.  ``complement=False`` evaluates the bare double
    series, which is exact only for integer Bob-side shapes.
    """
    a, beta, b, eps = _shapes(p)
    note = ""
    try:
        out = _series_kernel(a, beta, b, eps, p.rate, trunc, complement)
    except (ArithmeticError, FloatingPointError, OverflowError) as exc:
        out = None
        note = str(exc)
    if out is not None:
        ok = out.converged and out.cancellation <= trunc.max_cancellation and -1e-6 <= out.value <= 1 + 1e-6
        if not ok and not note:
            note = out.note or (
                f"cancellation {out.cancellation:.3g}" if out.cancellation > trunc.max_cancellation
                else f"value {out.value!r} outside [0, 1]")
        if ok or not fallback:
            return SecrecyResult(
                value=min(max(out.value, 0.0), 1.0),
                terms_used_n=out.n_used,
                terms_used_l=out.l_used,
                converged=ok,
                method="series",
                residual_estimate=out.residual,
                raw_value=out.value,
                cancellation=out.cancellation,
                note=note,
            )
    if not fallback:
        raise ArithmeticError(f"outage series failed: {note}")
    q = outage_quadrature(p)
    return SecrecyResult(q.value, out.n_used if out else 0, out.l_used if out else 0, False,
                         "quadrature", q.residual_estimate, q.raw_value,
                         out.cancellation if out else math.inf, note=f"fallback: {note}")


def pnon_series(p: SchemeParams, trunc: Truncation = DEFAULT_TRUNCATION, *, fallback: bool = True) -> SecrecyResult:
    """Probability of non-zero secrecy capacity from its single series.

    Terms are all positive; the n-sum stops when a geometric bound on the
    remaining tail falls below ``1e-12`` (or after ``n_max`` terms when
    ``trunc.adaptive`` is off).
    """
    a, beta, b, eps = _shapes(p)
    p0 = eps + beta
    x = beta / p0
    base = a * math.log(beta) + b * math.log(eps) - math.lgamma(b) - (a + b) * math.log(p0)
    n = np.arange(trunc.n_max, dtype=float)
    logs = base + n * math.log(x) + special.gammaln(a + b + n) - special.gammaln(a + n + 1.0)
    scale = float(np.max(logs))
    terms = np.exp(logs - scale)
    if trunc.adaptive:
        # ratio of successive terms, used to bound the tail
        ratios = x * (a + b + n) / (a + n + 1.0)
        r_tail = np.maximum(ratios, x)
        with np.errstate(divide="ignore"):
            bound = terms * math.exp(scale) * r_tail / np.maximum(1.0 - r_tail, 1e-300)
        hits = np.flatnonzero(bound < 1e-12)
        if hits.size == 0:
            if fallback:
                q = outage_quadrature(SchemeParams(p.main, p.eve, 0.0, p.scheme))
                return SecrecyResult(1.0 - q.value, trunc.n_max, 1, False, "quadrature",
                                     q.residual_estimate, 1.0 - q.raw_value,
                                     note="fallback: P_non tail bound not reached")
            stop = trunc.n_max - 1
            residual = float(bound[-1])
            ok = False
        else:
            stop = int(hits[0])
            residual = float(bound[stop])
            ok = True
    else:
        stop = trunc.n_max - 1
        residual = float(terms[-1]) * math.exp(scale)
        ok = True
    outage0 = float(np.sum(terms[: stop + 1])) * math.exp(scale)
    raw = 1.0 - outage0
    return SecrecyResult(min(max(raw, 0.0), 1.0), stop + 1, 1, ok, "series", residual, raw)


# --------------------------------------------------------------------------
# quadrature oracle


def _eve_pdf(x: float, b: float, eps: float) -> float:
    if x <= 0.0:
        return 0.0 if b > 1.0 else (eps if b == 1.0 else math.inf)
    return math.exp(b * math.log(eps) + (b - 1.0) * math.log(x) - eps * x - math.lgamma(b))


def outage_quadrature(p: SchemeParams, *, tail: float = 1e-16, epsrel: float = 1e-11) -> SecrecyResult:
    """Outage by adaptive quadrature over Eve's SNR.

    Integrates ``f_E(x) * P(a, beta (2^R (1 + x) - 1))`` over ``[0, U]``
    where ``U`` leaves Eve-side tail mass below ``tail``.
    """
    a, beta, b, eps = _shapes(p)
    c = 2.0 ** p.rate

    def integrand(x):
        return _eve_pdf(x, b, eps) * special.gammainc(a, beta * (c * (1.0 + x) - 1.0))

    upper = float(special.gammainccinv(b, tail)) / eps
    lo_q = float(special.gammaincinv(b, 1e-6)) / eps
    hi_q = float(special.gammainccinv(b, 1e-6)) / eps
    mode = max(b - 1.0, 0.0) / eps
    # Bob's CDF turns over around x where beta (c (1+x) - 1) ~ a
    knee = max((a / beta + 1.0) / c - 1.0, 0.0)
    pts = sorted({v for v in (lo_q, mode, hi_q, knee) if 0.0 < v < upper})
    total = 0.0
    err = 0.0
    edges = [0.0, *pts, upper]
    for x0, x1 in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(integrand, x0, x1, epsabs=0.0, epsrel=epsrel, limit=400)
        total += val
        err += e
    if not (err <= max(1e-9, 0.0)) or not math.isfinite(total):
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds 1e-9 (value {total!r})")
    return SecrecyResult(min(max(total, 0.0), 1.0), 0, 0, True, "quadrature", err, total)


def pnon_exact(p: SchemeParams) -> float:
    """``Pr(gamma_B > gamma_E)`` through the regularized incomplete beta function.

    Independent of both the series and the quadrature paths.
    """
    a, beta, b, eps = _shapes(p)
    return float(special.betainc(b, a, eps / (eps + beta)))


def diversity_order(main: EffectiveNakagami) -> float:
    """High-SNR slope of the outage curve: the total shape of Bob's SNR."""
    return main.shape


# --------------------------------------------------------------------------
# scheme assembly


def scheme_lbb(geometry: SystemGeometry, budget: LinkBudget, beam: Beamformer, rate: float) -> SchemeParams:
    return SchemeParams(effective_main(geometry, budget, beam),
                        effective_eve(geometry, budget, beam), rate, "lbb")


def scheme_nb(geometry: SystemGeometry, budget: LinkBudget, rate: float) -> SchemeParams:
    n_a, n_e = geometry.n_alice, geometry.n_eve
    lam = lambda0_mean(n_a, n_e, budget.k_eve)
    main = EffectiveNakagami.from_k(budget.k_bob, budget.mean_snr_bob(geometry) / n_a, n_a)
    eve = EffectiveNakagami.from_k(budget.k_eve, budget.mean_snr_eve(geometry) * lam / n_a, n_a * n_e)
    return SchemeParams(main, eve, rate, "nb")


def scheme_csi(geometry: SystemGeometry, budget: LinkBudget, rate: float) -> SchemeParams:
    main = EffectiveNakagami.from_k(budget.k_bob, budget.mean_snr_bob(geometry), geometry.n_alice)
    return SchemeParams(main, effective_csi_eve(geometry, budget), rate, "csi")


def nakagami_pair(m_main: float, mean_main: float, m_eve: float, mean_eve: float,
                  rate: float, branches_main: int = 1, branches_eve: int = 1,
                  scheme: str = "lbb") -> SchemeParams:
    """SchemeParams built straight from Nakagami shapes and per-branch means."""
    return SchemeParams(EffectiveNakagami.from_m(m_main, mean_main, branches_main),
                        EffectiveNakagami.from_m(m_eve, mean_eve, branches_eve), rate, scheme)
