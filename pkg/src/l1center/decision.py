"""Decide on which side of a line the center lies.

Given a rectangle ``R`` known to contain a center and a line ``L`` through
it, only the planes of grid cells met by ``L`` are needed: the envelope of
those planes agrees with the maximum expected distance along ``L``. Each
point's cells are found by walking the line through its grid, which costs
time proportional to the number of grid columns and rows that meet ``R``.

A cell family is the block of cells whose interior meets the interior of
``R``: columns ``ix1 .. xend - 1`` and rows ``iy1 .. yend - 1``, where
``ix1`` is the predecessor index of the left edge and ``xend`` the number
of grid values strictly below the right edge.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .envelope import Plane, cell_planes, plane_for_cell
from .lp_core import LineSpec, Rect, Side, descent_side, min_envelope_on_segment, rect_cone
from .model import PointPrep, PrepTable


class Outcome(enum.Enum):
    FOUND = 0
    POSITIVE = 1
    NEGATIVE = -1


@dataclass(frozen=True)
class DecisionOutcome:
    kind: Outcome
    point: tuple[float, float] | None = None
    value: float | None = None
    n_planes: int = 0

    @property
    def found(self) -> bool:
        return self.kind is Outcome.FOUND


@dataclass(frozen=True)
class PredecessorCursor:
    ix1: int
    iy1: int
    xend: int
    yend: int

    @property
    def a(self) -> int:
        """Grid columns meeting the interior of the rectangle."""
        return self.xend - self.ix1

    @property
    def b(self) -> int:
        return self.yend - self.iy1

    @classmethod
    def fresh(cls, prep: PointPrep, rect: Rect) -> "PredecessorCursor":
        return cls(
            bisect_right(prep.xs, rect.x1) - 1,
            bisect_right(prep.ys, rect.y1) - 1,
            bisect_left(prep.xs, rect.x2),
            bisect_left(prep.ys, rect.y2),
        )


@dataclass
class CursorArrays:
    """Per-row cursors of a :class:`PrepTable`, as parallel int arrays."""

    ix1: np.ndarray
    xend: np.ndarray
    iy1: np.ndarray
    yend: np.ndarray

    @classmethod
    def fresh(cls, table: PrepTable, rect: Rect) -> "CursorArrays":
        return cls(
            np.count_nonzero(table.XS <= rect.x1, axis=1) - 1,
            np.count_nonzero(table.XS < rect.x2, axis=1),
            np.count_nonzero(table.YS <= rect.y1, axis=1) - 1,
            np.count_nonzero(table.YS < rect.y2, axis=1),
        )

    def take(self, keep: np.ndarray) -> "CursorArrays":
        return CursorArrays(self.ix1[keep], self.xend[keep], self.iy1[keep], self.yend[keep])

    def __getitem__(self, i: int) -> PredecessorCursor:
        return PredecessorCursor(int(self.ix1[i]), int(self.iy1[i]), int(self.xend[i]), int(self.yend[i]))


# -- the walk ------------------------------------------------------------------


def _closure_span(vals: np.ndarray, v: float, lo: int, hi: int) -> tuple[int, ...]:
    """Family indices in ``[lo, hi]`` whose closed interval contains ``v``."""
    right = min(max(bisect_right(vals, v, lo, hi + 1) - 1, lo), hi)
    left = min(max(bisect_left(vals, v, lo, hi + 1) - 1, lo), hi)
    return (left, right) if left != right else (right,)


def walk_cells(
    xs: np.ndarray,
    ys: np.ndarray,
    cursor: PredecessorCursor,
    line: LineSpec,
    tmin: float,
    tmax: float,
) -> tuple[list[tuple[int, int]], int]:
    """Cells of the family whose closure meets the line between ``tmin`` and ``tmax``.

    Returns the cells in walk order (duplicates removed) and the number of
    cells the walk stepped through.
    """
    c0, c1 = cursor.ix1, cursor.xend - 1
    r0, r1 = cursor.iy1, cursor.yend - 1
    out: dict[tuple[int, int], None] = {}

    def emit(jx: int, jy: int) -> None:
        if c0 <= jx <= c1 and r0 <= jy <= r1:
            out[(jx, jy)] = None

    if line.is_vertical or line.is_horizontal:
        if line.is_vertical:
            cols = _closure_span(xs, line.c / line.a, c0, c1)
            for jx in cols:
                for jy in range(r0, r1 + 1):
                    emit(jx, jy)
        else:
            rows = _closure_span(ys, line.c / line.b, r0, r1)
            for jx in range(c0, c1 + 1):
                for jy in rows:
                    emit(jx, jy)
        return list(out), (r1 - r0 + 1) if line.is_vertical else (c1 - c0 + 1)

    (ox, oy), (tx, ty) = line.origin, line.direction
    up = ty > 0
    if tmin == -math.inf:
        jx, jy = c0, (r0 if up else r1)
    else:
        px, py = line.point(tmin)
        for a in _closure_span(xs, px, c0, c1):
            for b in _closure_span(ys, py, r0, r1):
                emit(a, b)
        jx = min(max(bisect_right(xs, px, c0, c1 + 1) - 1, c0), c1)
        jy = min(max(bisect_right(ys, py, r0, r1 + 1) - 1, r0), r1)
        if not up:
            # a start on a grid line going down belongs to the lower row
            jy = min(max(bisect_left(ys, py, r0, r1 + 1) - 1, r0), r1)
    emit(jx, jy)
    visited = 1
    while True:
        tX = (xs[jx + 1] - ox) / tx if jx < c1 else math.inf
        if up:
            tY = (ys[jy + 1] - oy) / ty if jy < r1 else math.inf
        else:
            tY = (ys[jy] - oy) / ty if jy > r0 else math.inf
        tn = min(tX, tY)
        if tn > tmax or tn == math.inf:
            break
        corner = max(tX, tY) < math.inf and abs(tX - tY) <= 1e-12 * max(1.0, abs(tX), abs(tY))
        nx, ny = jx, jy
        if tX <= tY or corner:
            nx = min(bisect_right(xs, xs[jx + 1], jx + 1, c1 + 1) - 1, c1)
        if tY <= tX or corner:
            if up:
                ny = min(bisect_right(ys, ys[jy + 1], jy + 1, r1 + 1) - 1, r1)
            else:
                ny = max(bisect_left(ys, ys[jy], r0, jy) - 1, r0)
        if corner:
            emit(nx, jy)
            emit(jx, ny)
        jx, jy = nx, ny
        emit(jx, jy)
        visited += 1
    if math.isfinite(tmax):
        px, py = line.point(tmax)
        for a in _closure_span(xs, px, c0, c1):
            for b in _closure_span(ys, py, r0, r1):
                emit(a, b)
    return list(out), visited


def collect_planes_on_line(
    prep: PointPrep,
    rect: Rect,
    line: LineSpec,
    cursor: PredecessorCursor | None = None,
    owner: int = -1,
) -> list[Plane]:
    seg = rect.clip(line)
    if seg is None:
        raise ValueError("line does not meet the rectangle")
    if cursor is None:
        cursor = PredecessorCursor.fresh(prep, rect)
    cells, _ = walk_cells(prep.xs, prep.ys, cursor, line, *seg)
    return [plane_for_cell(prep, jx, jy, owner) for jx, jy in cells]


# -- batched collection over a table ------------------------------------------------


def _ragged_rows(starts: np.ndarray, stops: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Segment ids and positions enumerating ``range(starts[i], stops[i])`` for all i."""
    lens = np.maximum(stops - starts, 0)
    total = int(lens.sum())
    seg = np.repeat(np.arange(len(lens)), lens)
    offs = np.cumsum(lens) - lens
    pos = np.arange(total) - np.repeat(offs, lens) + np.repeat(starts, lens)
    return seg, pos


def _axis_planes(table: PrepTable, rows: np.ndarray, cur: CursorArrays, rect: Rect, line: LineSpec) -> np.ndarray:
    vertical = line.is_vertical
    v = line.c / line.a if vertical else line.c / line.b
    V = table.XS if vertical else table.YS
    lo, hi = (cur.ix1, cur.xend) if vertical else (cur.iy1, cur.yend)
    edge = rect.x1 if vertical else rect.y1
    # columns (or rows) whose closure holds the line: scan each point's values inside R
    seg, pos = _ragged_rows(lo + 1, hi)
    vals = V[rows[seg], pos]
    k = len(rows)
    n_le = np.bincount(seg, weights=vals <= v, minlength=k).astype(np.int64)
    n_lt = np.bincount(seg, weights=vals < v, minlength=k).astype(np.int64)
    right = lo + n_le
    left = lo + n_lt
    if v <= edge:
        left = right
    other_lo, other_hi = (cur.iy1, cur.yend) if vertical else (cur.ix1, cur.xend)
    seg2, pos2 = _ragged_rows(other_lo, other_hi)
    r = rows[seg2]
    blocks = [(r, right[seg2], pos2)]
    two = left != right
    if two.any():
        sel = two[seg2]
        blocks.append((r[sel], left[seg2][sel], pos2[sel]))
    rr = np.concatenate([b[0] for b in blocks])
    fixed = np.concatenate([b[1] for b in blocks])
    free = np.concatenate([b[2] for b in blocks])
    return cell_planes(table, rr, fixed, free) if vertical else cell_planes(table, rr, free, fixed)


def _count_at_most(seg_v: np.ndarray, v: np.ndarray, seg_q: np.ndarray, q: np.ndarray, k: int, strict: bool) -> np.ndarray:
    """For each query, how many values of its own segment are ``<= q`` (``< q`` if strict)."""
    nv = len(v)
    seg = np.concatenate([seg_v, seg_q])
    val = np.concatenate([v, q])
    # ties: with strict counting a query sorts before equal values
    kind = np.concatenate([np.full(nv, 1 if strict else 0), np.full(len(q), 0 if strict else 1)])
    order = np.lexsort((kind, val, seg))
    is_v = order < nv
    before = np.cumsum(is_v) - is_v
    per_seg = np.bincount(seg_v, minlength=k)
    earlier = np.cumsum(per_seg) - per_seg
    out = np.empty(len(q), dtype=np.int64)
    qpos = np.flatnonzero(~is_v)
    out[order[qpos] - nv] = before[qpos] - earlier[seg[order[qpos]]]
    return out


def _sloped_planes(table: PrepTable, rows: np.ndarray, cur: CursorArrays, line: LineSpec,
                   tmin: float, tmax: float) -> np.ndarray:
    """Vectorized gather of family cells met by a line that is neither vertical nor horizontal.

    Each point's segment is cut at its grid crossings; one sample per piece
    (plus the endpoints) then names the cells, taking both closure cells
    whenever a sample sits on a grid line.
    """
    k = len(rows)
    (ox, oy), (tx, ty) = line.origin, line.direction
    segx, posx = _ragged_rows(cur.ix1 + 1, cur.xend)
    vx = table.XS[rows[segx], posx]
    segy, posy = _ragged_rows(cur.iy1 + 1, cur.yend)
    vy = table.YS[rows[segy], posy]
    tc = np.concatenate([(vx - ox) / tx, (vy - oy) / ty])
    sc = np.concatenate([segx, segy])
    inside = (tc > tmin) & (tc < tmax)
    tc, sc = tc[inside], sc[inside]
    if math.isfinite(tmin):
        lo = np.full(k, tmin)
    else:
        lo = np.full(k, tmax if math.isfinite(tmax) else 0.0)
        np.minimum.at(lo, sc, tc)
        lo -= 1.0
    if math.isfinite(tmax):
        hi = np.full(k, tmax)
    else:
        hi = lo.copy()
        np.maximum.at(hi, sc, tc)
        hi += 1.0
    t_all = np.concatenate([lo, tc, hi])
    s_all = np.concatenate([np.arange(k), sc, np.arange(k)])
    order = np.lexsort((t_all, s_all))
    t_all, s_all = t_all[order], s_all[order]
    same = s_all[1:] == s_all[:-1]
    t_s = np.concatenate([t_all, (t_all[1:][same] + t_all[:-1][same]) / 2])
    s_s = np.concatenate([s_all, s_all[1:][same]])
    px, py = ox + t_s * tx, oy + t_s * ty
    cells = []
    for cx in (True, False):
        jx = cur.ix1[s_s] + _count_at_most(segx, vx, s_s, px, k, cx)
        for cy in (True, False):
            jy = cur.iy1[s_s] + _count_at_most(segy, vy, s_s, py, k, cy)
            cells.append(np.stack([s_s, jx, jy]))
    C = np.unique(np.concatenate(cells, axis=1), axis=1)
    return cell_planes(table, rows[C[0]], C[1], C[2])


def _single_cell_mask(cur: CursorArrays) -> np.ndarray:
    return (cur.xend - cur.ix1 == 1) & (cur.yend - cur.iy1 == 1)


def table_planes_on_line(
    table: PrepTable,
    rect: Rect,
    line: LineSpec,
    cursors: CursorArrays | None = None,
    rows: np.ndarray | None = None,
) -> np.ndarray:
    """Planes of all cells met by ``line`` for the given rows, as a ``(k, 3)`` array."""
    seg = rect.clip(line)
    if seg is None:
        raise ValueError("line does not meet the rectangle")
    if rows is None:
        rows = np.arange(table.n)
    if cursors is None:
        cursors = CursorArrays.fresh(table.take(rows), rect)
    if line.is_vertical or line.is_horizontal:
        return _axis_planes(table, rows, cursors, rect, line)
    single = _single_cell_mask(cursors)
    parts = [cell_planes(table, rows[single], cursors.ix1[single], cursors.iy1[single])]
    multi = np.flatnonzero(~single)
    if multi.size:
        parts.append(_sloped_planes(table, rows[multi], cursors.take(multi), line, *seg))
    return np.concatenate(parts)


# -- the decision ---------------------------------------------------------------------


def decide_from_planes(planes: np.ndarray, rect: Rect, line: LineSpec, tol: float = 1e-9) -> DecisionOutcome:
    seg = rect.clip(line)
    if seg is None:
        side = rect.side_of(line)
        return DecisionOutcome(Outcome.POSITIVE if side > 0 else Outcome.NEGATIVE)
    q, value, tight = min_envelope_on_segment(planes, (line, seg[0], seg[1]), tol)
    side = descent_side(planes[tight], line, q, rect_cone(rect, q, tol), tol)
    if side is Side.NO_DESCENT:
        return DecisionOutcome(Outcome.FOUND, q, value, len(planes))
    return DecisionOutcome(Outcome.POSITIVE if side is Side.POSITIVE else Outcome.NEGATIVE, n_planes=len(planes))


def decide_side(
    preps: PrepTable | Sequence[PointPrep],
    rect: Rect,
    line: LineSpec,
    cursors: CursorArrays | Sequence[PredecessorCursor] | None = None,
    rows: np.ndarray | None = None,
    tol: float = 1e-9,
) -> DecisionOutcome:
    """Is the center on ``line``, and if not, on which side?

    The caller guarantees that a center lies in the closed ``rect``.
    ``preps`` may be a :class:`PrepTable` (with optional ``rows`` selecting
    the points in play) or a sequence of :class:`PointPrep`.
    """
    if rect.clip(line) is None:
        return decide_from_planes(np.empty((0, 3)), rect, line, tol)
    if isinstance(preps, PrepTable):
        planes = table_planes_on_line(preps, rect, line, cursors, rows)
    else:
        if cursors is None:
            cursors = [PredecessorCursor.fresh(p, rect) for p in preps]
        planes = np.array(
            [(h.alpha, h.beta, h.gamma)
             for i, (p, c) in enumerate(zip(preps, cursors))
             for h in collect_planes_on_line(p, rect, line, c, i)]
        ).reshape(-1, 3)
    return decide_from_planes(planes, rect, line, tol)
