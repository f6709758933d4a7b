"""Expected distance of an uncertain point and the planes of its grid cells.

Inside one cell of a point's grid the expected L1 distance is affine:
splitting the locations at the query's x coordinate gives

    sum_p f_p |x_p - x| = x (2 A[j] - M) - 2 B[j] + sum_p f_p x_p

where ``j`` is the predecessor index of ``x`` and ``A``, ``B`` are the
prefix arrays built in :mod:`l1center.model`. The y part is the same.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import PointPrep, PrepTable, predecessor_index


@dataclass(frozen=True)
class Plane:
    alpha: float
    beta: float
    gamma: float
    owner: int = -1
    cell: tuple[int, int] = (-1, -1)

    def __call__(self, x: float, y: float) -> float:
        return self.alpha * x + self.beta * y + self.gamma


def plane_for_cell(prep: PointPrep, jx: int, jy: int, owner: int = -1) -> Plane:
    m = prep.m
    if not (0 <= jx <= m and 0 <= jy <= m):
        raise IndexError(f"cell ({jx}, {jy}) outside 0..{m}")
    M = prep.total_mass
    alpha = 2.0 * prep.ax[jx] - M
    beta = 2.0 * prep.ay[jy] - M
    # fixed association order keeps gamma reproducible bit for bit
    gamma = (prep.sum_fx - 2.0 * prep.bx[jx]) + (prep.sum_fy - 2.0 * prep.by[jy])
    return Plane(float(alpha), float(beta), float(gamma), owner, (jx, jy))


def cell_planes(table: PrepTable, rows: np.ndarray, jx: np.ndarray, jy: np.ndarray) -> np.ndarray:
    """Vectorized :func:`plane_for_cell`; returns a ``(k, 3)`` array."""
    M = table.mass[rows]
    out = np.empty((len(rows), 3))
    out[:, 0] = 2.0 * table.AX[rows, jx] - M
    out[:, 1] = 2.0 * table.AY[rows, jy] - M
    out[:, 2] = (table.sfx[rows] - 2.0 * table.BX[rows, jx]) + (table.sfy[rows] - 2.0 * table.BY[rows, jy])
    return out


def planes_to_array(planes: Sequence[Plane] | np.ndarray) -> np.ndarray:
    if isinstance(planes, np.ndarray):
        return np.asarray(planes, dtype=np.float64).reshape(-1, 3)
    return np.array([(h.alpha, h.beta, h.gamma) for h in planes], dtype=np.float64).reshape(-1, 3)


def expected_distance(prep: PointPrep, q: Sequence[float]) -> float:
    x, y = float(q[0]), float(q[1])
    h = plane_for_cell(prep, predecessor_index(prep.xs, x), predecessor_index(prep.ys, y))
    return h(x, y)


def ed_max(preps: Sequence[PointPrep], q: Sequence[float]) -> tuple[float, int]:
    """Largest expected distance to ``q`` and the first point attaining it."""
    if not preps:
        raise ValueError("ed_max needs at least one point")
    best, arg = -np.inf, -1
    for i, prep in enumerate(preps):
        v = expected_distance(prep, q)
        if v > best:
            best, arg = v, i
    return best, arg


def table_expected_distances(table: PrepTable, q: Sequence[float]) -> np.ndarray:
    """Expected distance of every row of ``table`` to ``q``."""
    x, y = float(q[0]), float(q[1])
    jx = np.count_nonzero(table.XS <= x, axis=1) - 1
    jy = np.count_nonzero(table.YS <= y, axis=1) - 1
    rows = np.arange(table.n)
    h = cell_planes(table, rows, jx, jy)
    return h[:, 0] * x + h[:, 1] * y + h[:, 2]


def table_ed_max(table: PrepTable, q: Sequence[float]) -> tuple[float, int]:
    d = table_expected_distances(table, q)
    i = int(np.argmax(d))
    return float(d[i]), i
