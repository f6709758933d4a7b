"""Low-dimensional minimization of upper envelopes of planes.

Three primitives back the decision and finishing steps of the solver:

* :func:`min_max_affine` minimizes the maximum of affine functions of one
  variable over an interval. Lines are paired, and each median test on the
  pair intersections discards at least a quarter of them, so the work is
  linear in the number of lines.
* :func:`descent_side` asks whether the envelope decreases when leaving a
  line towards either side, given the planes tight at a point of the line.
* :func:`min_envelope_over_rect` finds the lowest point of an envelope of
  planes over a rectangle by randomized incremental linear programming.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .envelope import Plane, planes_to_array

INF = math.inf


class InconsistentDecision(RuntimeError):
    """Descent was detected on both sides of a line."""


class Side(enum.Enum):
    NO_DESCENT = 0
    POSITIVE = 1
    NEGATIVE = -1


@dataclass(frozen=True)
class LineSpec:
    """The line ``a x + b y = c`` with ``a**2 + b**2 == 1``.

    The positive side is ``a x + b y > c``. Points on the line are
    parameterized as ``origin + t * direction`` where the direction points
    right, or up for vertical lines.
    """

    a: float
    b: float
    c: float

    @classmethod
    def from_coeffs(cls, a: float, b: float, c: float) -> "LineSpec":
        norm = math.hypot(a, b)
        if norm == 0 or not math.isfinite(norm) or not math.isfinite(c):
            raise ValueError("a line needs finite coefficients with (a, b) != (0, 0)")
        if norm == 1.0:
            return cls(float(a), float(b), float(c))
        return cls(a / norm, b / norm, c / norm)

    @classmethod
    def vertical(cls, x0: float) -> "LineSpec":
        return cls(1.0, 0.0, float(x0))

    @classmethod
    def horizontal(cls, y0: float) -> "LineSpec":
        return cls(0.0, 1.0, float(y0))

    @property
    def is_vertical(self) -> bool:
        return self.b == 0.0

    @property
    def is_horizontal(self) -> bool:
        return self.a == 0.0

    @property
    def normal(self) -> tuple[float, float]:
        return self.a, self.b

    @property
    def direction(self) -> tuple[float, float]:
        tx, ty = self.b, -self.a
        if tx < 0 or (tx == 0 and ty < 0):
            tx, ty = -tx, -ty
        return tx + 0.0, ty + 0.0

    @property
    def origin(self) -> tuple[float, float]:
        if self.is_vertical:
            return self.c / self.a, 0.0
        if self.is_horizontal:
            return 0.0, self.c / self.b
        return self.c * self.a, self.c * self.b

    def point(self, t: float) -> tuple[float, float]:
        if self.is_vertical:
            return self.c / self.a, t
        if self.is_horizontal:
            return t, self.c / self.b
        (ox, oy), (tx, ty) = self.origin, self.direction
        return ox + t * tx, oy + t * ty

    def side(self, x: float, y: float) -> float:
        return self.a * x + self.b * y - self.c


@dataclass(frozen=True)
class Rect:
    x1: float = -INF
    x2: float = INF
    y1: float = -INF
    y2: float = INF

    def __post_init__(self) -> None:
        if not (self.x1 <= self.x2 and self.y1 <= self.y2):
            raise ValueError(f"empty rectangle {self}")

    @property
    def bounded(self) -> bool:
        return all(map(math.isfinite, (self.x1, self.x2, self.y1, self.y2)))

    def contains(self, x: float, y: float, slack: float = 0.0) -> bool:
        return (self.x1 - slack <= x <= self.x2 + slack) and (self.y1 - slack <= y <= self.y2 + slack)

    def clip(self, line: LineSpec) -> tuple[float, float] | None:
        """Parameter interval of ``line`` inside the closed rectangle, or None."""
        (ox, oy), (tx, ty) = line.origin, line.direction
        lo, hi = -INF, INF
        for o, d, e1, e2 in ((ox, tx, self.x1, self.x2), (oy, ty, self.y1, self.y2)):
            if d == 0.0:
                if not (e1 <= o <= e2):
                    return None
                continue
            if line.is_vertical or line.is_horizontal:
                # axis lines are parameterized by the free coordinate itself
                lo, hi = max(lo, e1), min(hi, e2)
                continue
            t1, t2 = (e1 - o) / d, (e2 - o) / d
            if t1 > t2:
                t1, t2 = t2, t1
            lo, hi = max(lo, t1), min(hi, t2)
        if lo > hi:
            # a line grazing a corner can miss by rounding; accept it as a touch
            if lo - hi > 1e-12 * max(1.0, abs(lo), abs(hi)):
                return None
            lo = hi = 0.5 * (lo + hi)
        return lo, hi

    def side_of(self, line: LineSpec) -> int:
        """+1 or -1 if the closed rectangle lies strictly on one side, else 0."""
        lo = hi = -line.c
        for coef, e1, e2 in ((line.a, self.x1, self.x2), (line.b, self.y1, self.y2)):
            if coef == 0.0:
                continue
            v1, v2 = coef * e1, coef * e2
            lo += min(v1, v2)
            hi += max(v1, v2)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        return 0


def median_select(values: Sequence[float] | np.ndarray) -> float:
    """Lower median, the ``ceil(len / 2)``-th smallest value."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("median of an empty sequence")
    k = (arr.size - 1) // 2
    return float(np.partition(arr, k)[k])


# -- one variable -------------------------------------------------------------


@lru_cache(maxsize=64)
def _pair_indices(k: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(k, 1)


def _brute_min_max(a: np.ndarray, b: np.ndarray, lo: float, hi: float) -> tuple[float | None, float]:
    if lo == -INF and a.min() > 0:
        return None, -INF
    if hi == INF and a.max() < 0:
        return None, -INF
    cands = [t for t in (lo, hi) if math.isfinite(t)]
    cands.append(min(max(0.0, lo), hi))
    if a.size <= 6:
        # plain Python beats array setup for the tiny tight sets of a decision
        al, bl = a.tolist(), b.tolist()
        for i in range(len(al)):
            for j in range(i + 1, len(al)):
                if al[i] != al[j]:
                    t = (bl[j] - bl[i]) / (al[i] - al[j])
                    if lo <= t <= hi:
                        cands.append(t)
        best_t, best_v = None, INF
        for t in sorted(set(cands)):
            v = max(x * t + y for x, y in zip(al, bl))
            if v < best_v:
                best_t, best_v = t, v
        return float(best_t), float(best_v)
    i, j = _pair_indices(a.size)
    da = a[i] - a[j]
    ok = da != 0
    t = (b[j][ok] - b[i][ok]) / da[ok]
    t = t[(t >= lo) & (t <= hi)]
    ts = np.unique(np.concatenate([np.array(cands), t]))
    vals = np.max(np.outer(ts, a) + b, axis=1)
    k = int(np.argmin(vals))
    return float(ts[k]), float(vals[k])


def min_max_affine(
    slopes: Sequence[float] | np.ndarray,
    intercepts: Sequence[float] | np.ndarray,
    lo: float = -INF,
    hi: float = INF,
    small: int = 48,
) -> tuple[float | None, float]:
    """Minimize ``max_k slopes[k] * t + intercepts[k]`` over ``lo <= t <= hi``.

    Returns ``(t, value)``; ``(None, -inf)`` when the maximum is unbounded
    below on the interval.
    """
    a = np.asarray(slopes, dtype=np.float64).ravel()
    b = np.asarray(intercepts, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValueError("no lines to minimize")
    if lo > hi:
        raise ValueError("empty interval")
    if lo == hi:
        return float(lo), float(np.max(a * lo + b))
    while a.size > small:
        k = a.size // 2
        a1, b1, a2, b2 = a[:k], b[:k], a[k:2 * k], b[k:2 * k]
        swap = a1 > a2
        sa = np.where(swap, a2, a1)
        sb = np.where(swap, b2, b1)
        la = np.where(swap, a1, a2)
        lb = np.where(swap, b1, b2)
        keep_s = np.ones(k, dtype=bool)
        keep_l = np.ones(k, dtype=bool)
        par = sa == la
        keep_s[par] = sb[par] > lb[par]
        keep_l[par] = ~keep_s[par]
        cross = ~par
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(cross, (sb - lb) / (la - sa), np.nan)
        left = cross & (t <= lo)
        right = cross & (t >= hi)
        keep_s[left] = False
        keep_l[right] = False
        open_ = cross & ~left & ~right
        if open_.any():
            tm = median_select(t[open_])
            vals = a * tm + b
            F = float(vals.max())
            tight = vals >= F - 1e-12 * max(1.0, abs(F))
            smin, smax = float(a[tight].min()), float(a[tight].max())
            if smin <= 0.0 <= smax:
                return tm, F
            if smin > 0:
                hi = tm
                drop = open_ & (t >= tm)
                keep_l[drop] = False
            else:
                lo = tm
                drop = open_ & (t <= tm)
                keep_s[drop] = False
        a = np.concatenate([sa[keep_s], la[keep_l], a[2 * k:]])
        b = np.concatenate([sb[keep_s], lb[keep_l], b[2 * k:]])
    return _brute_min_max(a, b, lo, hi)


# -- along a line -------------------------------------------------------------


def _tight(values: np.ndarray, best: float, tol: float) -> np.ndarray:
    return np.flatnonzero(values >= best - tol * max(1.0, abs(best)))


def min_envelope_on_segment(
    planes: Sequence[Plane] | np.ndarray,
    seg: tuple[LineSpec, float, float],
    tol: float = 1e-9,
) -> tuple[tuple[float, float], float, np.ndarray]:
    """Lowest point of the envelope of ``planes`` restricted to a segment.

    ``seg`` is ``(line, tmin, tmax)`` in the line's own parameterization.
    Returns the point, the envelope value there, and the indices of planes
    within ``tol * max(1, |value|)`` of that value.
    """
    H = planes_to_array(planes)
    if H.shape[0] == 0:
        raise ValueError("no planes")
    line, tmin, tmax = seg
    if line.is_vertical:
        x0 = line.c / line.a
        slopes, icpt = H[:, 1], H[:, 0] * x0 + H[:, 2]
    elif line.is_horizontal:
        y0 = line.c / line.b
        slopes, icpt = H[:, 0], H[:, 1] * y0 + H[:, 2]
    else:
        (ox, oy), (tx, ty) = line.origin, line.direction
        slopes = H[:, 0] * tx + H[:, 1] * ty
        icpt = H[:, 0] * ox + H[:, 1] * oy + H[:, 2]
    t, _ = min_max_affine(slopes, icpt, tmin, tmax)
    if t is None:
        raise ValueError("envelope is unbounded below along the segment")
    x, y = line.point(t)
    vals = H[:, 0] * x + H[:, 1] * y + H[:, 2]
    best = float(vals.max())
    return (x, y), best, _tight(vals, best, tol)


def rect_cone(rect: Rect, q: Sequence[float], tol: float = 1e-9) -> list[tuple[float, float]]:
    """Inward normals of the rectangle edges that ``q`` lies on."""
    x, y = q
    cone = []
    for edge, coord, w in ((rect.x1, x, (1.0, 0.0)), (rect.x2, x, (-1.0, 0.0)),
                           (rect.y1, y, (0.0, 1.0)), (rect.y2, y, (0.0, -1.0))):
        if math.isfinite(edge) and abs(coord - edge) <= tol * max(1.0, abs(edge)):
            cone.append(w)
    return cone


def descent_side(
    tight: Sequence[Plane] | np.ndarray,
    line: LineSpec,
    q_prime: Sequence[float] | None = None,
    cone: Sequence[tuple[float, float]] | None = None,
    tol: float = 1e-9,
) -> Side:
    """Report which side of ``line`` the envelope of ``tight`` descends into.

    Only gradients matter, so ``q_prime`` is accepted for symmetry with the
    caller and otherwise unused. For each side ``s`` the direction
    ``d = s * normal + u * direction`` is optimized over ``u``; ``cone``
    lists vectors ``w`` with the admissibility constraint ``w . d >= 0``.
    """
    G = planes_to_array(tight)[:, :2]
    if G.shape[0] == 0:
        raise ValueError("empty tight set")
    (nx, ny), (tx, ty) = line.normal, line.direction
    c = G[:, 0] * nx + G[:, 1] * ny
    e = G[:, 0] * tx + G[:, 1] * ty
    eps = tol * max(1.0, float(np.abs(G).max()))
    found = []
    for s in (1.0, -1.0):
        lo, hi = -INF, INF
        feasible = True
        for wx, wy in cone or ():
            wn, wt = wx * nx + wy * ny, wx * tx + wy * ty
            if abs(wt) < 1e-15:
                if s * wn < -1e-15:
                    feasible = False
            elif wt > 0:
                lo = max(lo, -s * wn / wt)
            else:
                hi = min(hi, -s * wn / wt)
        if not feasible or lo > hi:
            continue
        _, val = min_max_affine(e, s * c, lo, hi)
        if val < -eps:
            found.append(Side.POSITIVE if s > 0 else Side.NEGATIVE)
    if len(found) == 2:
        raise InconsistentDecision("envelope descends on both sides of the line")
    return found[0] if found else Side.NO_DESCENT


# -- over a rectangle -----------------------------------------------------------


def _lp1(c, prev, con, box, tol):
    """Lexicographic minimum of ``(c . p, x, y)`` on the line of ``con``."""
    ax, ay, b = con
    nn = ax * ax + ay * ay
    px, py = b * ax / nn, b * ay / nn
    dx, dy = -ay, ax
    lo, hi = -INF, INF
    x1, x2, y1, y2 = box
    rows = [(-1.0, 0.0, -x1), (1.0, 0.0, x2), (0.0, -1.0, -y1), (0.0, 1.0, y2)]
    rows.extend(prev)
    for qx, qy, qb in rows:
        den = qx * dx + qy * dy
        rhs = qb - (qx * px + qy * py)
        if abs(den) <= 1e-14 * math.sqrt((qx * qx + qy * qy) * nn):
            if rhs < -tol * max(1.0, abs(qb)):
                return None
            continue
        s = rhs / den
        if den > 0:
            hi = min(hi, s)
        else:
            lo = max(lo, s)
    if lo > hi:
        span = tol * max(1.0, abs(lo), abs(hi))
        if lo - hi > span:
            return None
        lo = hi = 0.5 * (lo + hi)
    cd = c[0] * dx + c[1] * dy
    if cd == 0.0:
        cd = dx if dx != 0.0 else dy
    s = lo if cd > 0 else hi
    return px + s * dx, py + s * dy


def _lp2(c, cons, box, rng, tol):
    """Lexicographic minimum of ``(c . p, x, y)`` over ``box`` and ``cons``."""
    x1, x2, y1, y2 = box
    v = (x2 if c[0] < 0 else x1, y2 if c[1] < 0 else y1)
    if not cons:
        return v
    order = rng.permutation(len(cons))
    placed: list[tuple[float, float, float]] = []
    for i in order:
        con = cons[i]
        qx, qy, qb = con
        if qx * v[0] + qy * v[1] > qb + tol * max(1.0, abs(qb), abs(qx * v[0]) + abs(qy * v[1])):
            v = _lp1(c, placed, con, box, tol)
            if v is None:
                return None
        placed.append(con)
    return v


def _envelope_lp(H: np.ndarray, box: tuple[float, float, float, float], rng, tol: float):
    order = rng.permutation(H.shape[0])
    a0, b0, g0 = H[order[0]]
    v = _lp2((a0, b0), [], box, rng, tol)
    z = a0 * v[0] + b0 * v[1] + g0
    done = [order[0]]
    for i in order[1:]:
        a, b, g = H[i]
        hv = a * v[0] + b * v[1] + g
        if hv > z + tol * max(1.0, abs(z)):
            P = H[done]
            cons = list(zip((P[:, 0] - a).tolist(), (P[:, 1] - b).tolist(), (g - P[:, 2]).tolist()))
            w = _lp2((a, b), cons, box, rng, tol)
            if w is None:
                raise RuntimeError("numerical failure in envelope LP")
            v = w
            z = a * v[0] + b * v[1] + g
        done.append(i)
    vals = H[:, 0] * v[0] + H[:, 1] * v[1] + H[:, 2]
    return (float(v[0]), float(v[1])), float(vals.max())


def min_envelope_over_rect(
    planes: Sequence[Plane] | np.ndarray,
    rect: Rect,
    rng: np.random.Generator | int | None = 0,
    tol: float = 1e-12,
) -> tuple[tuple[float, float], float]:
    """Lowest point over ``rect`` of the upper envelope of ``planes``.

    Unbounded rectangles are handled by solving on growing boxes until the
    optimum stops moving, which terminates whenever the envelope is
    coercive on the rectangle.
    """
    H = planes_to_array(planes)
    if H.shape[0] == 0:
        raise ValueError("no planes")
    rng = np.random.default_rng(rng)
    if rect.bounded:
        return _envelope_lp(H, (rect.x1, rect.x2, rect.y1, rect.y2), rng, tol)
    finite = [abs(e) for e in (rect.x1, rect.x2, rect.y1, rect.y2) if math.isfinite(e)]
    grad = np.abs(H[:, :2]).sum(axis=1)
    S = 1.0 + max(finite, default=0.0) + float(np.max(np.abs(H[:, 2]) / np.maximum(grad, 1e-300), initial=0.0).clip(max=1e12))
    prev = None
    for _ in range(64):
        box = (max(rect.x1, -S), min(rect.x2, S), max(rect.y1, -S), min(rect.y2, S))
        cur = _envelope_lp(H, box, rng, tol)
        if prev is not None and cur[1] >= prev[1] - 1e-12 * max(1.0, abs(prev[1])):
            return prev
        prev = cur
        S *= 16.0
    raise ValueError("envelope appears unbounded below over the rectangle")
