"""Shared fixtures.

The session-scoped solve keeps the calibration constant from being recomputed
by every module; oracle helpers live in oracles.py next to this file and are
imported directly where a test needs an independent route.
"""
import pytest

from msregret import solve_tau_star


@pytest.fixture(scope="session")
def tau_star_solved() -> float:
    return solve_tau_star()
