"""Seeded random instances.

Randomness comes from ``numpy.random.default_rng`` (PCG64), so a seed fixes
the instance across platforms.
"""

from __future__ import annotations

import numpy as np

from .model import Instance, InstanceError, Metric

DISTRIBUTIONS = ("uniform", "clustered")
CLUSTER_SIGMA = 0.05


def random_arrays(n: int, m: int, seed: int = 0, distribution: str = "uniform"):
    """Return ``(X, Y, P)`` for ``n`` points with ``m`` locations each."""
    if n < 1 or m < 1:
        raise InstanceError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    if distribution not in DISTRIBUTIONS:
        raise InstanceError(f"unknown distribution {distribution!r}")
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        X = rng.random((n, m))
        Y = rng.random((n, m))
    else:
        cx, cy = rng.random((n, 1)), rng.random((n, 1))
        X = cx + CLUSTER_SIGMA * rng.standard_normal((n, m))
        Y = cy + CLUSTER_SIGMA * rng.standard_normal((n, m))
    P = rng.random((n, m)) + 1e-12
    P /= P.sum(axis=1, keepdims=True)
    return X, Y, P


def random_instance(
    n: int,
    m: int,
    seed: int = 0,
    distribution: str = "uniform",
    metric: Metric | str = Metric.L1,
    weighted: bool = False,
) -> Instance:
    X, Y, P = random_arrays(n, m, seed, distribution)
    W = None
    if weighted:
        W = np.random.default_rng([seed, 1]).uniform(0.5, 2.0, n)
    return Instance.from_arrays(X, Y, P, W, metric)
