"""Brute-force reference solvers used to cross-check the fast path.

Nothing here calls :mod:`l1center.lp_core` or :mod:`l1center.decision`.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .envelope import Plane, plane_for_cell
from .model import Instance, Metric, apply_weight_reduction, build_prep, to_l1_frame

PLANE_LIMIT = 600


class OracleSizeError(ValueError):
    """The exhaustive oracle refuses inputs above its plane budget."""


def ed_max_direct(instance: Instance, q: Sequence[float]) -> float:
    """Largest expected distance to ``q``, summed location by location."""
    x, y = float(q[0]), float(q[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError("query point must be finite")
    best = -math.inf
    for pt in instance.points:
        total = 0.0
        for px, py, p in zip(pt.x.tolist(), pt.y.tolist(), pt.p.tolist()):
            dx, dy = abs(px - x), abs(py - y)
            d = max(dx, dy) if instance.metric is Metric.LINF else dx + dy
            total += p * d
        best = max(best, pt.weight * total)
    return best


def _ed_max_vec(X: np.ndarray, Y: np.ndarray, WP: np.ndarray, linf: bool, x: float, y: float) -> float:
    dx, dy = np.abs(X - x), np.abs(Y - y)
    d = np.maximum(dx, dy) if linf else dx + dy
    return float((WP * d).sum(axis=1).max())


def enumerate_all_planes(instance: Instance) -> list[Plane]:
    """Every cell plane of every point's grid, point by point, x-cell major."""
    inst = apply_weight_reduction(instance)
    out = []
    for i, pt in enumerate(inst.points):
        prep = build_prep(pt)
        for jx in range(prep.m + 1):
            for jy in range(prep.m + 1):
                out.append(plane_for_cell(prep, jx, jy, owner=i))
    return out


def _breaks(v: np.ndarray) -> np.ndarray:
    u = np.unique(v)
    return u if len(u) > 1 else np.array([u[0], u[0]])


def _cell_candidates(H: np.ndarray, box: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Candidate minimizers of max-of-planes inside each box.

    ``H`` has shape ``(C, n, 3)`` and ``box`` rows are ``(x1, x2, y1, y2)``.
    An optimum over a box is a vertex fixed by three of its constraints:
    three planes, two planes and a box edge, or a box corner.
    """
    C, n, _ = H.shape
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    owner: list[np.ndarray] = []
    cells = np.arange(C)
    for cx in (0, 1):
        for cy in (2, 3):
            xs.append(box[:, cx])
            ys.append(box[:, cy])
            owner.append(cells)
    if n >= 2:
        pairs = np.array(list(itertools.combinations(range(n), 2)))
        D = H[:, pairs[:, 0]] - H[:, pairs[:, 1]]  # (C, P, 3): a x + b y + g = 0
        a, b, g = D[..., 0], D[..., 1], D[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in (0, 1):
                ex = box[:, k][:, None]
                yy = -(a * ex + g) / b
                ok = b != 0
                xs.append(np.broadcast_to(ex, yy.shape)[ok])
                ys.append(yy[ok])
                owner.append(np.broadcast_to(cells[:, None], yy.shape)[ok])
            for k in (2, 3):
                ey = box[:, k][:, None]
                xx = -(b * ey + g) / a
                ok = a != 0
                xs.append(xx[ok])
                ys.append(np.broadcast_to(ey, xx.shape)[ok])
                owner.append(np.broadcast_to(cells[:, None], xx.shape)[ok])
    if n >= 3:
        tri = np.array(list(itertools.combinations(range(n), 3)))
        D1 = H[:, tri[:, 0]] - H[:, tri[:, 1]]
        D2 = H[:, tri[:, 0]] - H[:, tri[:, 2]]
        det = D1[..., 0] * D2[..., 1] - D1[..., 1] * D2[..., 0]
        scale = np.maximum(1.0, np.abs(D1[..., :2]).max(axis=-1) * np.abs(D2[..., :2]).max(axis=-1))
        ok = np.abs(det) > 1e-12 * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            xx = (-D1[..., 2] * D2[..., 1] + D2[..., 2] * D1[..., 1]) / det
            yy = (-D1[..., 0] * D2[..., 2] + D2[..., 0] * D1[..., 2]) / det
        xs.append(xx[ok])
        ys.append(yy[ok])
        owner.append(np.broadcast_to(cells[:, None], xx.shape)[ok])
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    c = np.concatenate(owner)
    b = box[c]
    inside = (x >= b[:, 0]) & (x <= b[:, 1]) & (y >= b[:, 2]) & (y <= b[:, 3])
    return np.stack([x[inside], y[inside]], axis=1), c[inside]


def lowest_point_in_box(planes: np.ndarray, box: Sequence[float]) -> tuple[tuple[float, float], float]:
    """Brute-force minimum of the upper envelope of ``planes`` over a bounded box."""
    H = np.asarray(planes, dtype=np.float64).reshape(1, -1, 3)
    B = np.asarray(box, dtype=np.float64).reshape(1, 4)
    if H.shape[1] == 0:
        raise ValueError("no planes")
    if not np.all(np.isfinite(B)):
        raise ValueError("box must be bounded")
    cand, _ = _cell_candidates(H, B)
    vals = (H[0, :, 0][None, :] * cand[:, :1] + H[0, :, 1][None, :] * cand[:, 1:] + H[0, :, 2][None, :]).max(axis=1)
    j = int(np.argmin(vals))
    return (float(cand[j, 0]), float(cand[j, 1])), float(vals[j])


def _exhaustive_l1(inst: Instance, chunk: int = 32) -> tuple[float, float]:
    planes = enumerate_all_planes(inst)
    n, m = inst.n, inst.m
    G = np.array([(h.alpha, h.beta, h.gamma) for h in planes]).reshape(n, m + 1, m + 1, 3)
    preps = [build_prep(pt) for pt in apply_weight_reduction(inst).points]
    X, Y, _, _ = inst.arrays()
    gx, gy = _breaks(X.ravel()), _breaks(Y.ravel())
    # the overlay of all grids restricted to the bounding box of locations
    bx = np.stack([gx[:-1], gx[1:]], axis=1)
    by = np.stack([gy[:-1], gy[1:]], axis=1)
    JX = np.stack([np.searchsorted(p.xs, bx.mean(axis=1), side="right") - 1 for p in preps], axis=1)
    JY = np.stack([np.searchsorted(p.ys, by.mean(axis=1), side="right") - 1 for p in preps], axis=1)
    cx, cy = len(bx), len(by)
    H = G[np.arange(n)[None, None, :], JX[:, None, :], JY[None, :, :]].reshape(cx * cy, n, 3)
    box = np.concatenate([np.repeat(bx, cy, axis=0), np.tile(by, (cx, 1))], axis=1)
    a, b, g = H[..., 0], H[..., 1], H[..., 2]
    x1, x2, y1, y2 = (box[:, k][:, None] for k in range(4))
    # every plane's minimum over its cell bounds the envelope's minimum there from below
    lower = (g + np.minimum(a * x1, a * x2) + np.minimum(b * y1, b * y2)).max(axis=1)
    corners = [(a * u + b * v + g).max(axis=1) for u in (x1, x2) for v in (y1, y2)]
    upper = np.minimum.reduce(corners)
    k0 = int(np.argmin(upper))
    best_val = float(upper[k0])
    best_pt = (float(box[k0, int(np.argmin([c[k0] for c in corners])) // 2]),
               float(box[k0, 2 + int(np.argmin([c[k0] for c in corners])) % 2]))
    order = np.argsort(lower, kind="stable")
    for start in range(0, len(order), chunk):
        idx = order[start:start + chunk]
        idx = idx[lower[idx] <= best_val]
        if idx.size == 0:
            break
        cand, owner = _cell_candidates(H[idx], box[idx])
        if len(cand) == 0:
            continue
        Hc = H[idx][owner]
        vals = (Hc[..., 0] * cand[:, :1] + Hc[..., 1] * cand[:, 1:] + Hc[..., 2]).max(axis=1)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val, best_pt = float(vals[j]), (float(cand[j, 0]), float(cand[j, 1]))
    return best_pt


def oracle_center(instance: Instance, plane_limit: int = PLANE_LIMIT) -> tuple[tuple[float, float], float]:
    """Exact center by exhaustive vertex search over the overlay of all grids.

    Within one cell of the overlay every expected distance is a single
    plane, so the minimum over that cell sits on a vertex cut out by three
    planes, two planes and a cell edge, or a cell corner. The bounding box
    of all locations holds a minimizer, so only cells inside it are visited.
    """
    size = instance.n * (instance.m + 1) ** 2
    if size > plane_limit:
        raise OracleSizeError(
            f"n*(m+1)^2 = {size} exceeds the oracle limit {plane_limit}; use oracle_center_approx"
        )
    if instance.metric is Metric.LINF:
        l1, frame = to_l1_frame(instance)
        q = frame.inverse(*_exhaustive_l1(l1))
    else:
        q = _exhaustive_l1(instance)
    q = (float(q[0]), float(q[1]))
    return q, ed_max_direct(instance, q)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(f, lo: float, hi: float, stop: float) -> tuple[float, float]:
    """Minimize a convex ``f`` on ``[lo, hi]`` until the bracket is narrower than ``stop``."""
    best_x, best_v = lo, f(lo)
    v = f(hi)
    if v < best_v:
        best_x, best_v = hi, v
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > stop:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    for x, v in ((c, fc), (d, fd)):
        if v < best_v:
            best_x, best_v = x, v
    return best_x, best_v


def oracle_center_approx(instance: Instance, tol: float = 1e-6) -> tuple[tuple[float, float], float]:
    """Nested golden-section search: outer over x, inner over y.

    ``min_y ed_max(x, y)`` is convex in x, so both levels are unimodal.
    Brackets shrink until their width times the Lipschitz bound of the
    objective falls below ``tol / 4``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    X, Y, P, W = instance.arrays()
    WP = P * W[:, None]
    linf = instance.metric is Metric.LINF
    lip = max(float(WP.sum(axis=1).max()), 1e-300)
    stop = tol / (4.0 * lip)
    x1, x2 = float(X.min()), float(X.max())
    y1, y2 = float(Y.min()), float(Y.max())
    inner_arg: dict[float, float] = {}

    def g(x: float) -> float:
        y, v = _golden(lambda yy: _ed_max_vec(X, Y, WP, linf, x, yy), y1, y2, stop)
        inner_arg[x] = y
        return v

    x, _ = _golden(g, x1, x2, stop)
    q = (float(x), float(inner_arg[x]))
    return q, ed_max_direct(instance, q)
