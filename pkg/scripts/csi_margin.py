"""Compare full-CSI transmission against the location-based optimum.

Two full-CSI beamformers are simulated in the fig3 preset: maximum
ratio transmission ``h^H / ||h||`` (the package's ``csi`` scheme) and an
Eve-aware variant that also knows Eve's channel statistics and maximizes
``(1 + snr_B |h b|^2) / (1 + snr_E E||G b||^2)``, i.e. ``b ~ B^{-1} h^H`` with
``B = I + snr_E E[G^H G]``.  The relative margin ``1 - O_csi / O*`` is
printed for each.
"""
from __future__ import annotations

import argparse
import math

import numpy as np

from ricianlbb.channel import LinkBudget, PolarLocation, SystemGeometry, db_to_linear, steering_alice
from ricianlbb.montecarlo import block_rng, estimate, sample_eve_channel, sample_main_channel
from ricianlbb.optimizer import OptimizeOptions, optimize_psi


def eve_aware_outage(geom, budget, rate, trials, seed) -> float:
    snr_b, snr_e = budget.mean_snr_bob(geom), budget.mean_snr_eve(geom)
    ke = budget.k_eve
    g_o = steering_alice(geom.theta_eve, geom)
    gram = geom.n_eve * (ke / (1 + ke) * np.outer(g_o.conj(), g_o) + np.eye(geom.n_alice) / (1 + ke))
    inv = np.linalg.inv(np.eye(geom.n_alice) + snr_e * gram)
    hits = 0
    block = 1 << 16
    for j, start in enumerate(range(0, trials, block)):
        n = min(block, trials - start)
        rng = block_rng(seed, j)
        h = sample_main_channel(rng, geom, budget, n)
        mat = sample_eve_channel(rng, geom, budget, n)
        b = h.conj() @ inv.T
        b /= np.linalg.norm(b, axis=1, keepdims=True)
        gb = snr_b * np.abs(np.einsum("ni,ni->n", h, b)) ** 2
        ge = snr_e * np.sum(np.abs(np.einsum("nij,nj->ni", mat, b)) ** 2, axis=1)
        hits += int(np.count_nonzero(1 + gb <= 2.0 ** rate * (1 + ge)))
    return hits / trials


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--snr-bob", type=float, default=10.0, help="dB")
    parser.add_argument("--snr-eve", type=float, default=5.0, help="dB")
    parser.add_argument("--trials", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    geom = SystemGeometry(PolarLocation(10.0, math.pi / 3), PolarLocation(10.0, math.pi / 4), 3, 2)
    budget = LinkBudget.for_mean_snr(geom, db_to_linear(args.snr_bob), db_to_linear(args.snr_eve),
                                     db_to_linear(10.0), db_to_linear(5.0))
    o_star = optimize_psi(geom, budget, 1.0, OptimizeOptions(scan_method="quadrature")).outage_min
    mrt = estimate("csi", geom, budget, None, 1.0, args.trials, args.seed).estimate_outage
    aware = eve_aware_outage(geom, budget, 1.0, args.trials, args.seed)
    print(f"LBB optimum O*           {o_star:.5f}")
    for name, v in (("MRT h^H/||h||", mrt), ("Eve-aware full CSI", aware)):
        print(f"{name:<24} {v:.5f}  margin {100 * (1 - v / o_star):+.1f}%")


if __name__ == "__main__":
    main()
