from __future__ import annotations

import math
import os

import pytest
from hypothesis import HealthCheck, settings

from ricianlbb.channel import LinkBudget, PolarLocation, SystemGeometry, db_to_linear

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", parent=settings.get_profile("repo"), max_examples=2000)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

# lines reported by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def fig3_geometry() -> SystemGeometry:
    return SystemGeometry(PolarLocation(10.0, math.pi / 3), PolarLocation(10.0, math.pi / 4), n_alice=3, n_eve=2)


def fig3_budget(geometry: SystemGeometry, snr_bob_db: float = 10.0, snr_eve_db: float = 5.0,
                k_bob_db: float = 10.0, k_eve_db: float = 5.0) -> LinkBudget:
    return LinkBudget.for_mean_snr(geometry, db_to_linear(snr_bob_db), db_to_linear(snr_eve_db),
                                   db_to_linear(k_bob_db), db_to_linear(k_eve_db))
