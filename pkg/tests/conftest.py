import json
import sys
from pathlib import Path

import numpy as np
import pytest

from rotwaves.continuation import ContinuationConfig, continue_branch
from rotwaves.dispersion import find_tau_star
from rotwaves.linear_wave import build_linear_wave
from rotwaves.uniform_stream import solve_uniform_stream
from rotwaves.vorticity import linear, polynomial, zero

ORACLES = json.loads((Path(__file__).parent / "oracles.json").read_text())


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


@pytest.fixture(scope="session")
def irrot():
    """Irrotational stream h=1, lambda=0.8 and its bifurcation frequency."""
    s = solve_uniform_stream(zero(), 1.0, 0.8)
    return s, find_tau_star(s)[0]


@pytest.fixture(scope="session")
def quadratic():
    """Stream with omega'' != 0, so the first-order field residual is O(t^2), not 0."""
    s = solve_uniform_stream(polynomial([0.5, 0.3, 0.4]), 1.0, 0.5)
    return s, find_tau_star(s)[0]


@pytest.fixture(scope="session")
def resonant():
    s = solve_uniform_stream(linear(2 * np.pi**2), 1.0, 1.0)
    return s, find_tau_star(s)[0]


@pytest.fixture(scope="session")
def fixed_branch(irrot):
    s, tau = irrot
    return continue_branch(build_linear_wave(s, tau, 0.01), ContinuationConfig())


@pytest.fixture(scope="session")
def variable_branch(irrot):
    s, tau = irrot
    return continue_branch(build_linear_wave(s, tau, 0.01, regime="variable_period"), ContinuationConfig())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
