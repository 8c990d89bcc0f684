"""Random parameter sets shared by the analytic tests and the acceptance checks."""
from __future__ import annotations

import numpy as np

from ricianlbb.analytic import SchemeParams, nakagami_pair


def random_params(count: int, seed: int = 2024, rate_range: tuple[float, float] = (0.0, 4.0)) -> list[SchemeParams]:
    """Shapes m in [1, 16], per-branch means log-uniform on [0.1, 1e4], branches 1..4."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m_b, m_e = rng.uniform(1.0, 16.0, 2)
        mean_b, mean_e = 10.0 ** rng.uniform(-1.0, 4.0, 2)
        n_b, n_e = rng.integers(1, 5, 2)
        rate = float(rng.uniform(*rate_range))
        out.append(nakagami_pair(float(m_b), float(mean_b), float(m_e), float(mean_e), rate,
                                 int(n_b), int(n_e)))
    return out
