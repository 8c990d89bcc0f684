"""Search for the beamforming direction that minimizes LBB secrecy outage."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .analytic import (
    DEFAULT_TRUNCATION,
    SecrecyResult,
    Truncation,
    outage_quadrature,
    outage_series,
    scheme_lbb,
)
from .channel import Beamformer, LinkBudget, SystemGeometry, fold_angle

AnalyticCase = Literal["none", "corollary3", "corollary4"]
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizeOptions:
    grid_points: int = 1024
    psi_tol: float = 1e-6
    tie_tol: float = 1e-12
    max_refine: int = 8
    scan_method: Literal["series", "quadrature"] = "series"
    eve_angle_known: bool = True
    use_shortcuts: bool = True
    trunc: Truncation = DEFAULT_TRUNCATION


@dataclass
class OptimizeResult:
    psi_star: float
    outage_min: float
    candidates: list[tuple[float, float]]
    analytic_case: AnalyticCase = "none"
    evaluations: int = 0
    result: SecrecyResult | None = field(default=None, repr=False)

    @property
    def psi_star_deg(self) -> float:
        return math.degrees(self.psi_star)


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6,
                   max_iter: int = 200) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The bracket endpoints are kept as candidates, so a minimum sitting on
    the boundary is returned exactly.
    """
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    best = min(((x1, f1), (x2, f2), (lo, f(lo)), (hi, f(hi))), key=lambda t: (t[1], t[0]))
    return best


class _OutageCurve:
    """Memoized ``psi -> outage`` for a fixed geometry and budget."""

    def __init__(self, geometry: SystemGeometry, budget: LinkBudget, rate: float, trunc: Truncation,
                 method: str = "series"):
        if method not in ("series", "quadrature"):
            raise ValueError(f"unknown scan method {method!r}")
        self.geometry = geometry
        self.budget = budget
        self.rate = rate
        self.trunc = trunc
        self.method = method
        self.cache: dict[float, SecrecyResult] = {}

    def params(self, psi: float):
        return scheme_lbb(self.geometry, self.budget, Beamformer.steer(psi, self.geometry), self.rate)

    def result(self, psi: float) -> SecrecyResult:
        psi = min(max(psi, 0.0), math.pi)
        hit = self.cache.get(psi)
        if hit is None:
            p = self.params(psi)
            hit = outage_series(p, self.trunc) if self.method == "series" else outage_quadrature(p)
            self.cache[psi] = hit
        return hit

    def __call__(self, psi: float) -> float:
        return self.result(psi).value


def eve_null_angles(geometry: SystemGeometry) -> list[float]:
    """Directions placing a null of the array factor on Eve.

    These are the ``psi`` in ``[0, pi]`` with
    ``tau_A (cos theta_E - cos psi) = 2 k pi / N_A`` for integer ``k`` not a
    multiple of ``N_A``; infeasible ``k`` are skipped.
    """
    n = geometry.n_alice
    tau = geometry.tau_alice
    ce = math.cos(geometry.theta_eve)
    k_lim = int(math.ceil(2.0 * tau * n / (2.0 * math.pi))) + 1
    out = []
    for k in range(-k_lim, k_lim + 1):
        if k % n == 0:
            continue
        cpsi = ce - 2.0 * k * math.pi / (n * tau)
        if -1.0 <= cpsi <= 1.0:
            out.append(math.acos(cpsi))
    return sorted(out)


def _local_minima(values: np.ndarray) -> list[int]:
    idx = []
    n = values.size
    for i in range(n):
        left = values[i - 1] if i > 0 else math.inf
        right = values[i + 1] if i < n - 1 else math.inf
        if values[i] <= left and values[i] <= right:
            # keep one index per flat run
            if idx and idx[-1] == i - 1 and values[i] == values[i - 1]:
                continue
            idx.append(i)
    return idx


def optimize_psi(geometry: SystemGeometry, budget: LinkBudget, rate: float,
                 options: OptimizeOptions | None = None) -> OptimizeResult:
    """Grid scan over ``[0, pi]`` followed by golden-section refinement.

    The ``max_refine`` lowest grid local minima are refined; the global
    minimum is the smallest refined outage, ties (within ``tie_tol``) broken
    toward smaller ``psi``.  ``scan_method="quadrature"`` drives the search
    with the quadrature evaluator; the reported outage at ``psi*`` always
    comes from the series.
    When ``K_E = 0`` or Eve's direction is unknown the answer is
    ``psi = theta_B`` and no search is run, unless ``use_shortcuts`` is off.
    """
    opts = options or OptimizeOptions()
    curve = _OutageCurve(geometry, budget, rate, opts.trunc, opts.scan_method)
    theta_b = geometry.theta_bob

    if not opts.eve_angle_known or (opts.use_shortcuts and budget.k_bob > 0 and budget.k_eve == 0):
        res = curve.result(theta_b)
        return OptimizeResult(theta_b, res.value, [(theta_b, res.value)], "corollary3", 1, res)

    case: AnalyticCase = "corollary4" if budget.k_bob == 0 and budget.k_eve > 0 else "none"
    grid = np.linspace(0.0, math.pi, opts.grid_points)
    values = np.array([curve(float(x)) for x in grid])

    # only the lowest grid minima can win after a +-1 step refinement; on
    # nearly flat curves roundoff would otherwise spawn dozens of them
    minima = sorted(_local_minima(values), key=lambda i: (values[i], i))[: opts.max_refine]
    refined = []
    for i in sorted(minima):
        lo = float(grid[max(i - 1, 0)])
        hi = float(grid[min(i + 1, grid.size - 1)])
        refined.append(golden_section(curve, lo, hi, opts.psi_tol))
    # grid points themselves stay eligible (flat or boundary minima)
    best_grid = int(np.argmin(values))
    refined.append((float(grid[best_grid]), float(values[best_grid])))

    o_min = min(v for _, v in refined)
    ties = sorted(x for x, v in refined if v - o_min <= opts.tie_tol)
    psi_star = ties[0]
    candidates = sorted(set((round(x, 12), v) for x, v in refined[:-1]) or {(psi_star, o_min)})
    final = curve.result(psi_star) if opts.scan_method == "series" else outage_series(curve.params(psi_star), opts.trunc)
    return OptimizeResult(psi_star, final.value, [(float(x), float(v)) for x, v in candidates],
                          case, len(curve.cache), final)


def outage_at_psi(geometry: SystemGeometry, budget: LinkBudget, rate: float, psi: float,
                  trunc: Truncation = DEFAULT_TRUNCATION) -> SecrecyResult:
    beam = Beamformer.steer(psi, geometry)
    return outage_series(scheme_lbb(geometry, budget, beam, rate), trunc)


def outage_no_eve_location(geometry: SystemGeometry, budget: LinkBudget, rate: float,
                           trunc: Truncation = DEFAULT_TRUNCATION) -> SecrecyResult:
    """Outage with the beam on Bob, as used when Eve's direction is unknown."""
    return outage_at_psi(geometry, budget, rate, geometry.theta_bob, trunc)


def _eve_angle_grid(points: int) -> np.ndarray:
    # midpoints of a uniform partition of [0, 2 pi)
    return (np.arange(points) + 0.5) * (2.0 * math.pi / points)


def average_outage_no_eve_location(geometry: SystemGeometry, budget: LinkBudget, rate: float,
                                   points: int = 72, trunc: Truncation = DEFAULT_TRUNCATION) -> float:
    """Mean of the beam-on-Bob outage over ``theta_E ~ U[0, 2 pi)``."""
    beam = Beamformer.steer(geometry.theta_bob, geometry)
    vals = []
    for th in _eve_angle_grid(points):
        g = geometry.with_angles(theta_eve=fold_angle(th))
        vals.append(outage_series(scheme_lbb(g, budget, beam, rate), trunc).value)
    return float(np.mean(vals))


def average_optimal_outage(geometry: SystemGeometry, budget: LinkBudget, rate: float,
                           points: int = 72, options: OptimizeOptions | None = None) -> float:
    """Mean of the optimized outage over ``theta_E ~ U[0, 2 pi)``.

    ``cos`` symmetry folds the grid onto ``[0, pi]``, so each distinct
    direction is optimized once.
    """
    cache: dict[float, float] = {}
    vals = []
    for th in _eve_angle_grid(points):
        key = round(fold_angle(th), 12)
        if key not in cache:
            cache[key] = optimize_psi(geometry.with_angles(theta_eve=key), budget, rate, options).outage_min
        vals.append(cache[key])
    return float(np.mean(vals))

