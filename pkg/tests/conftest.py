"""Shared helpers for the test suite."""
from __future__ import annotations

import numpy as np

from rabisim.operators import DensityMatrix


def random_density(rng: np.random.Generator, dims) -> DensityMatrix:
    """Full-rank random state via a Ginibre draw."""
    dim = int(np.prod(dims))
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, dims)


def random_pure(rng: np.random.Generator, dims) -> DensityMatrix:
    dim = int(np.prod(dims))
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return DensityMatrix.from_state(v, dims)


# verdict lines collected by the acceptance tests, echoed after the run
CRITERION_LINES: list = []


def record_criterion(line: str):
    CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.line(line)
