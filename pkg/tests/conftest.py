import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from l1center import Instance, UncertainPoint  # noqa: E402

DATA = Path(__file__).parent / "data"


def det_points(*coords, metric="l1"):
    """Instance of deterministic points (one location, probability 1)."""
    return Instance(tuple(UncertainPoint.from_locations([(x, y, 1.0)]) for x, y in coords), metric)


def one_point(*locs, weight=1.0):
    return Instance((UncertainPoint.from_locations(locs, weight),))


def random_small(rng, n_max=10, m_max=5, ties=False):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    X, Y = rng.random((n, m)), rng.random((n, m))
    if ties:
        X, Y = np.round(X * 4) / 4, np.round(Y * 4) / 4
    P = rng.random((n, m)) + 1e-3
    P /= P.sum(axis=1, keepdims=True)
    return Instance.from_arrays(X, Y, P)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
