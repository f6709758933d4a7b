"""Prune-and-search driver for the rectilinear center of uncertain points.

Each outer round shrinks a rectangle known to contain the center until at
least half of the points have no grid line crossing it; every such point
then contributes a single plane. Pairing those planes and locating the
center against the lines where paired planes cross lets a constant
fraction of the points be dropped. Rounds repeat until few points remain,
and a small linear program over the surviving cell planes finishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .decision import CursorArrays, DecisionOutcome, Outcome, _ragged_rows, decide_side
from .envelope import cell_planes, table_ed_max
from .lp_core import LineSpec, Rect, median_select, min_envelope_over_rect
from .model import Frame, Instance, Metric, PrepTable, apply_weight_reduction, to_l1_frame

THRESHOLD = 32


@dataclass
class SolverConfig:
    seed: int = 0
    tolerance: float = 1e-9
    threshold: int = THRESHOLD
    trace: bool = False


@dataclass
class SolverState:
    active: np.ndarray
    rect: Rect
    cursors: CursorArrays

    @classmethod
    def initial(cls, table: PrepTable) -> "SolverState":
        n, m = table.n, table.m
        full = np.full(n, m + 1, dtype=np.int64)
        zero = np.zeros(n, dtype=np.int64)
        return cls(np.arange(n), Rect(), CursorArrays(zero, full.copy(), zero.copy(), full))

    def x_lengths(self) -> np.ndarray:
        return self.cursors.xend - self.cursors.ix1 - 1

    def y_lengths(self) -> np.ndarray:
        return self.cursors.yend - self.cursors.iy1 - 1

    @property
    def totals(self) -> tuple[int, int]:
        return int(self.x_lengths().sum()), int(self.y_lengths().sum())

    def xsub(self, table: PrepTable, k: int) -> np.ndarray:
        """Grid x values of the ``k``-th active point strictly inside the x-range."""
        c = self.cursors
        return table.XS[self.active[k], c.ix1[k] + 1:c.xend[k]]

    def ysub(self, table: PrepTable, k: int) -> np.ndarray:
        c = self.cursors
        return table.YS[self.active[k], c.iy1[k] + 1:c.yend[k]]

    def drop(self, positions: np.ndarray) -> "SolverState":
        keep = np.ones(len(self.active), dtype=bool)
        keep[positions] = False
        return SolverState(self.active[keep], self.rect, self.cursors.take(keep))


@dataclass
class Found:
    point: tuple[float, float]
    value: float


@dataclass
class Context:
    """Counters and trace shared by the steps of one solve."""

    rng: np.random.Generator
    tol: float = 1e-9
    trace: list[dict[str, Any]] | None = None
    decisions: int = 0
    inner_steps: int = 0
    round: int = 0
    step: int = 0

    def decide(self, table: PrepTable, state: SolverState, line: LineSpec) -> DecisionOutcome:
        self.decisions += 1
        return decide_side(table, state.rect, line, state.cursors, state.active, self.tol)

    def emit(self, **event: Any) -> None:
        if self.trace is not None:
            event.setdefault("round", self.round)
            event.setdefault("step", self.step)
            self.trace.append(event)


def _rect_json(r: Rect) -> list[float | None]:
    return [v if math.isfinite(v) else None for v in (r.x1, r.x2, r.y1, r.y2)]


def _decision_name(d: DecisionOutcome) -> str:
    return {Outcome.FOUND: "center", Outcome.POSITIVE: "positive", Outcome.NEGATIVE: "negative"}[d.kind]


def inner_shrink_step(table: PrepTable, state: SolverState, ctx: Context) -> SolverState | Found:
    """Halve the grid values inside the rectangle in both x and y."""
    ctx.inner_steps += 1
    for axis in ("x", "y"):
        c = state.cursors
        lo, hi = (c.ix1, c.xend) if axis == "x" else (c.iy1, c.yend)
        seg, pos = _ragged_rows(lo + 1, hi)
        if seg.size == 0:
            continue
        V = table.XS if axis == "x" else table.YS
        vals = V[state.active[seg], pos]
        med = median_select(vals)
        line = LineSpec.vertical(med) if axis == "x" else LineSpec.horizontal(med)
        dec = ctx.decide(table, state, line)
        ctx.emit(rect=_rect_json(state.rect), axis=axis, median=med, decision=_decision_name(dec), pruned_indices=[])
        if dec.found:
            return Found(dec.point, dec.value)
        k = len(state.active)
        r = state.rect
        if dec.kind is Outcome.POSITIVE:
            # strict side: values equal to the median leave the range
            n_le = np.bincount(seg, weights=vals <= med, minlength=k).astype(np.int64)
            new_lo = lo + n_le
            if axis == "x":
                cur = CursorArrays(new_lo, c.xend, c.iy1, c.yend)
                rect = Rect(med, r.x2, r.y1, r.y2)
            else:
                cur = CursorArrays(c.ix1, c.xend, new_lo, c.yend)
                rect = Rect(r.x1, r.x2, med, r.y2)
        else:
            n_lt = np.bincount(seg, weights=vals < med, minlength=k).astype(np.int64)
            new_hi = lo + 1 + n_lt
            if axis == "x":
                cur = CursorArrays(c.ix1, new_hi, c.iy1, c.yend)
                rect = Rect(r.x1, med, r.y1, r.y2)
            else:
                cur = CursorArrays(c.ix1, c.xend, c.iy1, new_hi)
                rect = Rect(r.x1, r.x2, r.y1, med)
        state = SolverState(state.active, rect, cur)
    return state


def find_prunable(table: PrepTable, state: SolverState) -> tuple[np.ndarray, np.ndarray]:
    """Positions of active points whose grid has no line inside the rectangle.

    Returns the positions (into ``state.active``) and each one's relevant
    plane as rows of a ``(k, 3)`` array.
    """
    c = state.cursors
    pos = np.flatnonzero((c.xend - c.ix1 == 1) & (c.yend - c.iy1 == 1))
    planes = cell_planes(table, state.active[pos], c.ix1[pos], c.iy1[pos])
    return pos, planes


def _linear_range(A: np.ndarray, B: np.ndarray, G: np.ndarray, rect: Rect) -> tuple[np.ndarray, np.ndarray]:
    """Min and max of ``A x + B y + G`` over the rectangle (may be infinite)."""
    lo = G.copy()
    hi = G.copy()
    for coef, e1, e2 in ((A, rect.x1, rect.x2), (B, rect.y1, rect.y2)):
        with np.errstate(invalid="ignore"):
            v1 = np.where(coef == 0, 0.0, coef * e1)
            v2 = np.where(coef == 0, 0.0, coef * e2)
        lo += np.minimum(v1, v2)
        hi += np.maximum(v1, v2)
    return lo, hi


@dataclass
class PruneResult:
    pruned: np.ndarray
    dominated: int = 0
    divided: int = 0


def prune_round(
    table: PrepTable,
    state: SolverState,
    pstar: np.ndarray,
    relevant: np.ndarray,
    ctx: Context,
) -> PruneResult | Found:
    """Drop points whose relevant plane is beaten where the center lies.

    Prunable points are paired; a pair whose planes cross inside the
    rectangle yields a dividing line. After shearing so that the median
    divider slope becomes horizontal, dividers of opposite slope are paired
    and two decisions (one sheared-horizontal, one vertical) place the
    center in a quadrant that at least a quarter of the divider pairs miss.
    Vertical dividers get one decision of their own.
    """
    order = ctx.rng.permutation(len(pstar))
    k = len(order) // 2
    first, second = pstar[order[0:2 * k:2]], pstar[order[1:2 * k:2]]
    d = relevant[order[0:2 * k:2]] - relevant[order[1:2 * k:2]]
    A, B, G = d[:, 0], d[:, 1], d[:, 2]
    fmin, fmax = _linear_range(A, B, G, state.rect)
    losers: list[np.ndarray] = []
    dom_first = fmin >= 0  # first plane on top everywhere in R
    dom_second = ~dom_first & (fmax <= 0)
    losers += [second[dom_first], first[dom_second]]
    result = PruneResult(np.empty(0, dtype=np.int64), int(dom_first.sum() + dom_second.sum()))
    div = np.flatnonzero(~dom_first & ~dom_second)
    result.divided = int(div.size)

    def resolve(idx: np.ndarray, sign: np.ndarray) -> None:
        # sign of (first plane - second plane) over the region holding the center
        losers.append(np.where(sign > 0, second[idx], first[idx]))

    A, B, G = A[div], B[div], G[div]
    vert = B == 0
    sl = np.flatnonzero(~vert)
    if sl.size:
        slope = -A[sl] / B[sl]
        icpt = -G[sl] / B[sl]
        s = median_select(slope)
        ks = slope - s
        neg, pos_, zero = np.flatnonzero(ks < 0), np.flatnonzero(ks > 0), np.flatnonzero(ks == 0)
        npair = min(neg.size, pos_.size)
        ni, pi = neg[:npair], pos_[:npair]
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = (icpt[pi] - icpt[ni]) / (ks[ni] - ks[pi])
        yi = ks[ni] * xi + icpt[ni]
        ycands = np.concatenate([yi, icpt[zero]])
        if ycands.size:
            ym = median_select(ycands)
            dec = ctx.decide(table, state, LineSpec.from_coeffs(-s, 1.0, ym))
            ctx.emit(rect=_rect_json(state.rect), axis="sheared", slope=s, median=ym,
                     decision=_decision_name(dec), pruned_indices=[])
            if dec.found:
                return Found(dec.point, dec.value)
            below = dec.kind is Outcome.NEGATIVE
            far_zero = zero[icpt[zero] >= ym] if below else zero[icpt[zero] <= ym]
            resolve(div[sl[far_zero]], np.sign(B[sl[far_zero]]) * (-1.0 if below else 1.0))
            dprime = np.flatnonzero(yi >= ym) if below else np.flatnonzero(yi <= ym)
            if dprime.size:
                xm = median_select(xi[dprime])
                dec = ctx.decide(table, state, LineSpec.vertical(xm))
                ctx.emit(rect=_rect_json(state.rect), axis="x", median=xm,
                         decision=_decision_name(dec), pruned_indices=[])
                if dec.found:
                    return Found(dec.point, dec.value)
                left = dec.kind is Outcome.NEGATIVE
                far = dprime[xi[dprime] >= xm] if left else dprime[xi[dprime] <= xm]
                # the line of the pair that cannot enter the center's quadrant
                use_neg = below == left
                lines = ni[far] if use_neg else pi[far]
                S = 1.0 + abs(xm) + abs(ym)
                qx = xm + (-S if left else S)
                qy = ym + (-S if below else S)
                g = qy - ks[lines] * qx - icpt[lines]
                resolve(div[sl[lines]], np.sign(B[sl[lines]]) * np.sign(g))
    vt = np.flatnonzero(vert)
    if vt.size:
        xv = -G[vt] / A[vt]
        xm = median_select(xv)
        dec = ctx.decide(table, state, LineSpec.vertical(xm))
        ctx.emit(rect=_rect_json(state.rect), axis="vertical-dividers", median=xm,
                 decision=_decision_name(dec), pruned_indices=[])
        if dec.found:
            return Found(dec.point, dec.value)
        left = dec.kind is Outcome.NEGATIVE
        far = vt[xv >= xm] if left else vt[xv <= xm]
        resolve(div[far], np.sign(A[far]) * (-1.0 if left else 1.0))
    result.pruned = np.unique(np.concatenate(losers)).astype(np.int64)
    return result


def _bbox_clip(lo: float, hi: float, blo: float, bhi: float) -> tuple[float, float]:
    # clamping toward the locations never increases an expected distance
    if lo == -math.inf:
        lo = min(blo, hi)
    if hi == math.inf:
        hi = max(bhi, lo)
    return lo, hi


def finish_small(table: PrepTable, state: SolverState, ctx: Context) -> Found:
    """Shrink until O(1) grid values remain inside, then solve a small LP."""
    while True:
        tx, ty = state.totals
        if tx <= 1 and ty <= 1:
            break
        ctx.step += 1
        res = inner_shrink_step(table, state, ctx)
        if isinstance(res, Found):
            return res
        state = res
    c = state.cursors
    seg_x, jx = _ragged_rows(c.ix1, c.xend)
    b = (c.yend - c.iy1)[seg_x]
    seg, jy = _ragged_rows(c.iy1[seg_x], c.iy1[seg_x] + b)
    rows = state.active[seg_x][seg]
    planes = cell_planes(table, rows, jx[seg], jy)
    act = state.active
    r = state.rect
    x1, x2 = _bbox_clip(r.x1, r.x2, float(table.XS[act, 1].min()), float(table.XS[act, -1].max()))
    y1, y2 = _bbox_clip(r.y1, r.y2, float(table.YS[act, 1].min()), float(table.YS[act, -1].max()))
    point, value = min_envelope_over_rect(planes, Rect(x1, x2, y1, y2), ctx.rng)
    ctx.emit(rect=_rect_json(r), axis="finish", median=None, decision="center", pruned_indices=[],
             planes=int(len(planes)))
    return Found(point, value)


@dataclass
class SolveResult:
    center: tuple[float, float]
    objective: float
    stats: dict[str, Any] = field(default_factory=dict)
    trace: list[dict[str, Any]] | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "center": {"x": self.center[0], "y": self.center[1]},
            "objective": self.objective,
            "stats": self.stats,
        }


def inner_steps_for(m: int) -> int:
    return 2 + math.ceil(math.log2(m)) if m > 1 else 2


def solve_table(table: PrepTable, config: SolverConfig | None = None) -> SolveResult:
    """Solve an L1 instance given its (already weighted) preprocessing."""
    config = config or SolverConfig()
    ctx = Context(np.random.default_rng(config.seed), config.tolerance, [] if config.trace else None)
    state = SolverState.initial(table)
    t = inner_steps_for(table.m)
    rounds: list[dict[str, Any]] = []
    found: Found | None = None
    fallback = False
    while found is None and len(state.active) > config.threshold:
        ctx.round += 1
        n_round = len(state.active)
        for j in range(t):
            ctx.step = j + 1
            res = inner_shrink_step(table, state, ctx)
            if isinstance(res, Found):
                found = res
                break
            state = res
        if found is not None:
            break
        xt, yt = state.totals
        pstar, relevant = find_prunable(table, state)
        res = prune_round(table, state, pstar, relevant, ctx)
        if isinstance(res, Found):
            found = res
            break
        rounds.append({
            "active": n_round, "x_total": xt, "y_total": yt, "pstar": int(len(pstar)),
            "pruned": int(len(res.pruned)), "dominated": res.dominated, "divided": res.divided,
        })
        ctx.emit(rect=_rect_json(state.rect), axis="prune", median=None, decision=None,
                 pruned_indices=state.active[res.pruned].tolist())
        if len(res.pruned) == 0 and xt == 0 and yt == 0:
            fallback = True
            break
        state = state.drop(res.pruned)
    finished_by = "decision"
    if found is None:
        ctx.round += 1
        ctx.step = 0
        found = finish_small(table, state, ctx)
        finished_by = "finish"
    objective, arg = table_ed_max(table, found.point)
    stats = {
        "n": table.n,
        "m": table.m,
        "inner_steps_per_round": t,
        "rounds": len(rounds),
        "round_details": rounds,
        "pruned": int(sum(r["pruned"] for r in rounds)),
        "remaining": int(len(state.active)),
        "decision_calls": ctx.decisions,
        "inner_steps": ctx.inner_steps,
        "finished_by": finished_by,
        "fallback": fallback,
        "envelope_value": found.value,
        "argmax_point": arg,
    }
    return SolveResult((float(found.point[0]), float(found.point[1])), objective, stats, ctx.trace)


def linf_ed_max(instance: Instance, q: tuple[float, float]) -> float:
    X, Y, P, W = instance.arrays()
    d = np.maximum(np.abs(X - q[0]), np.abs(Y - q[1]))
    return float(np.max((P * W[:, None] * d).sum(axis=1)))


def solve(instance: Instance, config: SolverConfig | None = None) -> SolveResult:
    """Rectilinear (or L-infinity) center of the instance's uncertain points."""
    config = config or SolverConfig()
    work = apply_weight_reduction(instance)
    frame: Frame | None = None
    if work.metric is Metric.LINF:
        work, frame = to_l1_frame(work)
    res = solve_table(PrepTable.from_instance(work), config)
    if frame is not None:
        res.stats["l1_objective"] = res.objective
        res.center = frame.inverse(*res.center)
        res.objective = linf_ed_max(instance, res.center)
    res.stats["metric"] = instance.metric.value
    return res
