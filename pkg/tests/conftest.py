from __future__ import annotations

import numpy as np
import pytest

from freeconv import Domain, make_atomic


def random_atomic(rng: np.random.Generator, domain: Domain, k: int, conc: float = 1.0):
    """Random ``k``-atom measure on ``domain`` with Dirichlet masses."""
    w = rng.dirichlet(np.full(k, conc))
    if domain is Domain.REAL:
        x = rng.uniform(-3, 3, k)
    elif domain is Domain.HALFLINE:
        x = rng.uniform(0.1, 3, k)
    else:
        x = rng.uniform(0, 2 * np.pi, k)
    return make_atomic(list(zip(x, w)), domain)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bernoulli():
    return make_atomic([(0.0, 0.5), (2.0, 0.5)], Domain.REAL)


@pytest.fixture
def sym():
    return make_atomic([(-1.0, 0.5), (1.0, 0.5)], Domain.REAL)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
