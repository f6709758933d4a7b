import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1center.envelope import Plane
from l1center.lp_core import (
    InconsistentDecision,
    LineSpec,
    Rect,
    Side,
    descent_side,
    median_select,
    min_envelope_on_segment,
    min_envelope_over_rect,
    min_max_affine,
    rect_cone,
)
from l1center.oracle import lowest_point_in_box

X_AXIS = LineSpec.horizontal(0.0)
Y_AXIS = LineSpec.vertical(0.0)


def P(a, b, g):
    return Plane(float(a), float(b), float(g))


def test_linespec_normalized_and_sides():
    L = LineSpec.from_coeffs(3, 4, 10)
    assert L.a ** 2 + L.b ** 2 == pytest.approx(1)
    assert L.side(10, 10) > 0 and L.side(0, 0) < 0
    with pytest.raises(ValueError):
        LineSpec.from_coeffs(0, 0, 1)


def test_linespec_points_lie_on_line():
    for a, b, c in [(1, 0, 2), (0, 1, -3), (1, 2, 3), (-2, 1, 0.5)]:
        L = LineSpec.from_coeffs(a, b, c)
        for t in (-2.0, 0.0, 3.5):
            assert L.side(*L.point(t)) == pytest.approx(0, abs=1e-12)


def test_rect_clip():
    R = Rect(-1, 1, -1, 1)
    assert R.clip(LineSpec.vertical(0.5)) == (-1, 1)
    assert R.clip(LineSpec.vertical(2)) is None
    lo, hi = R.clip(LineSpec.from_coeffs(1, -1, 0))
    assert LineSpec.from_coeffs(1, -1, 0).point(lo) == pytest.approx((-1, -1))
    assert LineSpec.from_coeffs(1, -1, 0).point(hi) == pytest.approx((1, 1))
    assert R.side_of(LineSpec.vertical(2)) == -1 and R.side_of(LineSpec.vertical(-2)) == 1
    with pytest.raises(ValueError):
        Rect(1, 0, 0, 1)


@pytest.mark.parametrize("vals, want", [([3, 1, 2], 2), ([1, 2, 3, 4], 2), ([5], 5)])
def test_median_select_examples(vals, want):
    assert median_select(vals) == want


def test_median_select_empty():
    with pytest.raises(ValueError):
        median_select([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60))
def test_median_select_matches_sort(vals):
    assert median_select(vals) == sorted(vals)[(len(vals) - 1) // 2]


def test_segment_examples():
    q, v, tight = min_envelope_on_segment([P(1, 0, 0), P(-1, 0, 0)], (X_AXIS, -1, 1))
    assert q == pytest.approx((0, 0)) and v == pytest.approx(0) and sorted(tight) == [0, 1]
    q, v, tight = min_envelope_on_segment([P(2, 0, 0), P(-1, 0, 3)], (X_AXIS, 0, 5))
    assert q == pytest.approx((1, 0)) and v == pytest.approx(2) and sorted(tight) == [0, 1]
    q, v, tight = min_envelope_on_segment([P(1, 0, 0)], (X_AXIS, 0, 1))
    assert q == pytest.approx((0, 0)) and v == 0 and list(tight) == [0]


def test_segment_degenerate_and_empty():
    q, v, _ = min_envelope_on_segment([P(1, 2, 3)], (X_AXIS, 2, 2))
    assert q == (2, 0) and v == 5
    with pytest.raises(ValueError):
        min_envelope_on_segment([], (X_AXIS, 0, 1))


def test_segment_matches_dense_scan(rng):
    for _ in range(40):
        k = int(rng.integers(1, 51))
        H = rng.normal(size=(k, 3))
        L = LineSpec.from_coeffs(*rng.normal(size=3))
        tmin, tmax = sorted(rng.normal(size=2) * 3)
        q, v, _ = min_envelope_on_segment(H, (L, tmin, tmax))
        ts = np.linspace(tmin, tmax, 10_000)
        pts = np.array([L.point(t) for t in ts])
        env = (pts @ H[:, :2].T + H[:, 2]).max(axis=1)
        assert v <= env.min() + 1e-6
        assert v >= env.min() - 1e-6 * max(1, abs(v)) - (tmax - tmin) * np.abs(H[:, :2]).sum(axis=1).max() / 1e4


def test_min_max_affine_pruning_agrees_with_brute(rng):
    for _ in range(40):
        k = int(rng.integers(50, 400))
        a, b = rng.normal(size=k), rng.normal(size=k)
        lo, hi = sorted(rng.normal(size=2) * 2)
        t, v = min_max_affine(a, b, lo, hi)
        t2, v2 = min_max_affine(a, b, lo, hi, small=10 ** 6)
        assert v == pytest.approx(v2, rel=1e-12, abs=1e-12)
        assert lo <= t <= hi


def test_min_max_affine_unbounded():
    assert min_max_affine([1.0, 2.0], [0.0, 1.0]) == (None, -math.inf)


def test_descent_examples():
    assert descent_side([P(1, 0, 0)], Y_AXIS, (0, 0)) is Side.NEGATIVE
    assert descent_side([P(1, 0, 0), P(-1, 0, 0)], Y_AXIS, (0, 0)) is Side.NO_DESCENT
    assert descent_side([P(1, 1, 0), P(1, -1, 0)], Y_AXIS, (0, 0)) is Side.NEGATIVE


def test_descent_cone_blocks_exit():
    # on the left edge of R the only descent (toward -x) leaves the rectangle
    R = Rect(0, 1, -1, 1)
    cone = rect_cone(R, (0, 0))
    assert cone == [(1.0, 0.0)]
    assert descent_side([P(1, 0, 0)], Y_AXIS, (0, 0), cone) is Side.NO_DESCENT


def test_descent_inconsistent():
    # q' is not a minimizer along the line, so both sides report descent
    with pytest.raises(InconsistentDecision):
        descent_side([P(0, 1, 0)], Y_AXIS, (0, 0))


def test_descent_empty():
    with pytest.raises(ValueError):
        descent_side([], Y_AXIS, (0, 0))


def _segment_then_side(H, L, R):
    tmin, tmax = R.clip(L)
    q, v, tight = min_envelope_on_segment(H, (L, tmin, tmax))
    return q, v, descent_side(H[tight], L, q, rect_cone(R, q))


def test_descent_never_both_sides(rng):
    R = Rect(-3, 3, -3, 3)
    for _ in range(300):
        H = rng.normal(size=(int(rng.integers(1, 7)), 3))
        L = LineSpec.from_coeffs(*rng.normal(size=2), rng.normal() * 0.5)
        if R.clip(L) is None:
            continue
        _segment_then_side(H, L, R)  # raises InconsistentDecision on a bug


def test_no_descent_is_local_minimum(rng):
    R = Rect(-3, 3, -3, 3)
    checked = 0
    for _ in range(300):
        H = rng.normal(size=(int(rng.integers(1, 7)), 3))
        (cx, cy), _ = lowest_point_in_box(H, (-3, 3, -3, 3))
        a, b = rng.normal(size=2)
        # a line through the minimizer over R
        L = LineSpec.from_coeffs(a, b, a * cx + b * cy)
        q, v, side = _segment_then_side(H, L, R)
        if side is not Side.NO_DESCENT:
            continue
        checked += 1
        ang = rng.uniform(0, 2 * np.pi, 400)
        pts = np.array(q) + 1e-4 * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        pts = pts[(np.abs(pts) <= 3).all(axis=1)]
        env = (pts @ H[:, :2].T + H[:, 2]).max(axis=1)
        assert env.min() >= v - 1e-9 * max(1, abs(v))
    assert checked > 10


def test_rect_examples():
    pyramid = [P(1, 0, 0), P(-1, 0, 0), P(0, 1, 0), P(0, -1, 0)]
    q, v = min_envelope_over_rect(pyramid, Rect(-1, 1, -1, 1))
    assert q == pytest.approx((0, 0)) and v == pytest.approx(0)
    q, v = min_envelope_over_rect([P(1, 0, 0)], Rect(0, 1, 0, 1))
    assert q[0] == pytest.approx(0) and 0 <= q[1] <= 1 and v == pytest.approx(0)
    q, v = min_envelope_over_rect([P(1, 0, 1), P(-1, 0, 1), P(0, 1, 0), P(0, -1, 4)], Rect(-10, 10, -10, 10))
    assert v == pytest.approx(2)
    assert max(abs(q[0]) + 1, abs(q[1] - 2) + 2) == pytest.approx(2)


def test_rect_unbounded_coercive():
    q, v = min_envelope_over_rect([P(1, 1, -3), P(-1, -1, 5), P(1, -1, 0), P(-1, 1, 0)], Rect())
    assert v == pytest.approx(1)


def test_rect_empty():
    with pytest.raises(ValueError):
        min_envelope_over_rect([], Rect(0, 1, 0, 1))


def test_rect_matches_bruteforce(rng):
    for _ in range(60):
        k = int(rng.integers(1, 41))
        H = rng.normal(size=(k, 3))
        x1, x2 = sorted(rng.normal(size=2) * 3)
        y1, y2 = sorted(rng.normal(size=2) * 3)
        _, v = min_envelope_over_rect(H, Rect(x1, x2, y1, y2), rng=int(rng.integers(1 << 30)))
        _, w = lowest_point_in_box(H, (x1, x2, y1, y2))
        assert v == pytest.approx(w, rel=1e-7, abs=1e-7)


def test_rect_lp_deterministic_per_seed(rng):
    H = rng.normal(size=(30, 3))
    R = Rect(-2, 2, -2, 2)
    assert min_envelope_over_rect(H, R, rng=7) == min_envelope_over_rect(H, R, rng=7)
