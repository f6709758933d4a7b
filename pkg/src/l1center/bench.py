"""Wall-clock timing of :func:`l1center.solver.solve` over a size grid."""

from __future__ import annotations

import csv
import io
import itertools
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .generate import random_instance
from .solver import SolverConfig, solve


@dataclass
class BenchRow:
    n: int
    m: int
    median_ns: int
    p90_ns: int

    @property
    def mn(self) -> int:
        return self.n * self.m


def time_solve(n: int, m: int, repeats: int = 3, seed: int = 0) -> BenchRow:
    """Time ``repeats`` solves, each on a fresh instance (seeds ``seed``, ``seed+1``, ...)."""
    samples = []
    for r in range(repeats):
        inst = random_instance(n, m, seed + r)
        t0 = time.perf_counter_ns()
        solve(inst, SolverConfig(seed=seed))
        samples.append(time.perf_counter_ns() - t0)
    arr = np.array(samples)
    return BenchRow(n, m, int(np.median(arr)), int(np.percentile(arr, 90)))


def run_bench(n_list: Sequence[int], m_list: Sequence[int], repeats: int = 3, seed: int = 0) -> list[BenchRow]:
    return [time_solve(n, m, repeats, seed) for n, m in itertools.product(n_list, m_list)]


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "m", "mn", "median_ns", "p90_ns"])
    for r in rows:
        w.writerow([r.n, r.m, r.mn, r.median_ns, r.p90_ns])
    return buf.getvalue()


def loglog_slope(sizes: Sequence[float], times: Sequence[float]) -> float:
    """Least-squares slope of log(time) against log(size)."""
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
