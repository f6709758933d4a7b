import numpy as np
import pytest

from l1center.envelope import (
    Plane,
    cell_planes,
    ed_max,
    expected_distance,
    plane_for_cell,
    table_ed_max,
    table_expected_distances,
)
from l1center.model import Instance, PrepTable, UncertainPoint, build_prep
from l1center.oracle import ed_max_direct

TWO = UncertainPoint.from_locations([(1, 1, 0.4), (3, 2, 0.6)])
ORIGIN = UncertainPoint.from_locations([(0, 0, 1.0)])


def direct(pt, q):
    return float(np.sum(pt.p * (np.abs(pt.x - q[0]) + np.abs(pt.y - q[1]))))


def random_point(rng, m):
    return UncertainPoint(rng.normal(size=m), rng.normal(size=m), rng.random(m))


def test_plane_for_cell_example():
    h = plane_for_cell(build_prep(TWO), 1, 1)
    assert (h.alpha, h.beta, h.gamma) == pytest.approx((-0.2, -0.2, 2.2))
    assert h(1, 1) == pytest.approx(1.8)
    assert h.cell == (1, 1)


@pytest.mark.parametrize("cell, coeffs", [((0, 0), (-1, -1, 0)), ((1, 1), (1, 1, 0)), ((1, 0), (1, -1, 0))])
def test_plane_for_cell_single_location(cell, coeffs):
    h = plane_for_cell(build_prep(ORIGIN), *cell)
    assert (h.alpha, h.beta, h.gamma) == coeffs


def test_plane_for_cell_range():
    with pytest.raises(IndexError):
        plane_for_cell(build_prep(ORIGIN), 2, 0)


@pytest.mark.parametrize("q, want", [((1, 1), 1.8), ((0, 0), 3.8), ((3, 2), 0.4 * 3)])
def test_expected_distance_examples(q, want):
    assert expected_distance(build_prep(TWO), q) == pytest.approx(want)


def test_expected_distance_at_sole_location():
    assert expected_distance(build_prep(UncertainPoint.from_locations([(2, -3, 1)])), (2, -3)) == 0


def test_ed_max_examples():
    preps = [build_prep(UncertainPoint.from_locations([(x, 0, 1.0)])) for x in (0, 10)]
    assert ed_max(preps, (5, 0))[0] == 5
    assert ed_max(preps, (0, 0)) == (10, 1)
    assert ed_max(preps[:1], (2, 2))[0] == expected_distance(preps[0], (2, 2))
    with pytest.raises(ValueError):
        ed_max([], (0, 0))


def test_cell_consistency(rng):
    for _ in range(50):
        m = int(rng.integers(1, 8))
        pt = random_point(rng, m)
        prep = build_prep(pt)
        for _ in range(20):
            jx, jy = rng.integers(0, m + 1, size=2)
            lo_x = prep.xs[jx] if jx > 0 else prep.xs[1] - 5
            hi_x = prep.xs[jx + 1] if jx < m else prep.xs[m] + 5
            lo_y = prep.ys[jy] if jy > 0 else prep.ys[1] - 5
            hi_y = prep.ys[jy + 1] if jy < m else prep.ys[m] + 5
            q = (rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y))
            h = plane_for_cell(prep, int(jx), int(jy))
            want = direct(pt, q)
            assert h(*q) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_gradients_monotone(rng):
    prep = build_prep(random_point(rng, 9))
    alphas = [plane_for_cell(prep, j, 0).alpha for j in range(10)]
    betas = [plane_for_cell(prep, 0, j).beta for j in range(10)]
    assert np.all(np.diff(alphas) >= 0) and np.all(np.diff(betas) >= 0)


def test_support_and_convexity(rng):
    for _ in range(20):
        pt = random_point(rng, int(rng.integers(1, 7)))
        prep = build_prep(pt)
        Q = rng.normal(size=(200, 2)) * 3
        vals = np.array([expected_distance(prep, q) for q in Q])
        scale = max(1.0, float(np.abs(vals).max()))
        for jx in range(prep.m + 1):
            for jy in range(prep.m + 1):
                h = plane_for_cell(prep, jx, jy)
                assert np.all(h.alpha * Q[:, 0] + h.beta * Q[:, 1] + h.gamma <= vals + 1e-9 * scale)
        mid = np.array([expected_distance(prep, q) for q in (Q[:100] + Q[100:]) / 2])
        assert np.all(mid <= (vals[:100] + vals[100:]) / 2 + 1e-9 * scale)


def test_table_paths_agree(rng):
    X, Y, P = rng.normal(size=(30, 5)), rng.normal(size=(30, 5)), rng.random((30, 5))
    inst = Instance.from_arrays(X, Y, P, check_mass=False)
    table = PrepTable.from_instance(inst)
    preps = [build_prep(pt) for pt in inst.points]
    for q in rng.normal(size=(50, 2)):
        d = table_expected_distances(table, q)
        np.testing.assert_allclose(d, [expected_distance(p, q) for p in preps], rtol=1e-12, atol=1e-12)
        v, i = table_ed_max(table, q)
        assert (v, i) == pytest.approx(ed_max(preps, q))
        assert v == pytest.approx(ed_max_direct(inst, q), rel=1e-9)


def test_cell_planes_vectorized_matches_scalar(rng):
    X, Y, P = rng.normal(size=(6, 4)), rng.normal(size=(6, 4)), rng.random((6, 4))
    table = PrepTable.from_arrays(X, Y, P)
    rows = rng.integers(0, 6, 40)
    jx, jy = rng.integers(0, 5, 40), rng.integers(0, 5, 40)
    H = cell_planes(table, rows, jx, jy)
    for k in range(40):
        h = plane_for_cell(table.row(int(rows[k])), int(jx[k]), int(jy[k]))
        assert tuple(H[k]) == (h.alpha, h.beta, h.gamma)


def test_plane_is_callable():
    assert Plane(1.0, 2.0, 3.0)(1, 1) == 6.0
