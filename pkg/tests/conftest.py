"""Shared fixtures and dense reference computations for the test suite."""

import numpy as np
import pytest

from graphpyramid.graph import laplacian, random_geometric


def dense_laplacian(w):
    """Independent L = D - W from a dense adjacency."""
    w = np.asarray(w, dtype=float)
    return np.diag(w.sum(1)) - w


def dense_schur(L, keep):
    """Reference Schur complement using a dense inverse."""
    L = np.asarray(L, dtype=float)
    keep = np.asarray(keep, dtype=bool)
    a, b, c = L[np.ix_(keep, keep)], L[np.ix_(keep, ~keep)], L[np.ix_(~keep, ~keep)]
    return a - b @ np.linalg.inv(c) @ b.T


def pinv_resistance(L, i, j):
    lp = np.linalg.pinv(np.asarray(L, dtype=float))
    return lp[i, i] + lp[j, j] - 2 * lp[i, j]


def random_signal(n, seed):
    return np.random.default_rng(seed).standard_normal(n)


@pytest.fixture(scope="session")
def geo60():
    return random_geometric(60, 0.3, seed=11)


@pytest.fixture(scope="session")
def geo100():
    return random_geometric(100, 0.2, seed=3)


@pytest.fixture(scope="session")
def geo100_lap(geo100):
    return laplacian(geo100)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, detail = results[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {detail}")
