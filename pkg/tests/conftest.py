import re

import numpy as np
import pytest

from langevin_tails import make_huber_like, make_quadratic


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        def order(line):
            tag = re.match(r"AC-(\d+)(\w*)", line)
            return int(tag.group(1)), tag.group(2)

        for line in sorted(ACCEPTANCE_LINES, key=order):
            terminalreporter.write_line(line)


@pytest.fixture
def quad1():
    return make_quadratic(1, [1.0])


@pytest.fixture
def quad2():
    return make_quadratic(2, [1.0, 4.0])


@pytest.fixture
def huber1():
    return make_huber_like(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


BUILTINS = [
    ("quadratic_1d", lambda: make_quadratic(1, [1.0])),
    ("quadratic_3d", lambda: make_quadratic(3, [0.5, 1.0, 3.0])),
    ("huber_1d", lambda: make_huber_like(0.5)),
    ("huber_3d", lambda: make_huber_like(0.3, dim=3)),
    ("huber_smooth_2d", lambda: make_huber_like(0.5, dim=2, smooth=True)),
]


@pytest.fixture(scope="session")
def huber_stationary():
    """HuberLike beta=1/2, d=1, eta=1: 1e5 chains after 1e5 burn-in steps (about two minutes)."""
    import time

    from langevin_tails import ChainConfig, run_ensemble

    p = make_huber_like(0.5)
    cfg = ChainConfig(eta=1.0, dim=1, n_chains=100_000, burn_in=100_000, seed=2024)
    t0 = time.perf_counter()
    ens = run_ensemble(p, cfg, threads=0)
    ens.build_seconds = time.perf_counter() - t0
    return p, ens
