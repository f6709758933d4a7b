"""Instances of weighted uncertain points and their per-point preprocessing.

An uncertain point is a discrete distribution over ``m`` planar locations.
Each point is preprocessed into sorted coordinate lists with a leading
``-inf`` sentinel plus prefix sums of mass and mass-weighted coordinate,
which lets the expected-distance plane of any grid cell be read off in
constant time (see :mod:`l1center.envelope`).
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

NEG_INF = float("-inf")


class InstanceError(ValueError):
    """Raised when an instance fails validation."""


class ProbabilityMassWarning(UserWarning):
    """Probabilities of a point do not sum to one."""


class Metric(str, enum.Enum):
    L1 = "l1"
    LINF = "linf"


@dataclass(frozen=True)
class Location:
    x: float
    y: float
    prob: float


@dataclass(frozen=True, eq=False)
class UncertainPoint:
    """``m`` weighted locations stored column-wise.

    Use :meth:`from_locations` to build one from :class:`Location` objects;
    the array form exists so that large instances do not allocate one Python
    object per location.
    """

    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    weight: float = 1.0

    def __post_init__(self) -> None:
        for name in ("x", "y", "p"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "weight", float(self.weight))

    @classmethod
    def from_locations(cls, locations: Iterable[Location | tuple], weight: float = 1.0) -> "UncertainPoint":
        rows = [loc if isinstance(loc, Location) else Location(*loc) for loc in locations]
        return cls(
            np.array([r.x for r in rows], dtype=np.float64),
            np.array([r.y for r in rows], dtype=np.float64),
            np.array([r.prob for r in rows], dtype=np.float64),
            weight,
        )

    @property
    def m(self) -> int:
        return len(self.x)

    @property
    def locations(self) -> list[Location]:
        return [Location(float(a), float(b), float(c)) for a, b, c in zip(self.x, self.y, self.p)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UncertainPoint):
            return NotImplemented
        return (
            self.weight == other.weight
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.p, other.p)
        )

    __hash__ = None  # type: ignore[assignment]


def _validate_point(point: UncertainPoint, index: int | None = None) -> None:
    where = "" if index is None else f"point {index}: "
    if point.m < 1:
        raise InstanceError(f"{where}needs at least one location")
    if not (len(point.y) == len(point.p) == point.m):
        raise InstanceError(f"{where}x, y and p have different lengths")
    for name, arr in (("x", point.x), ("y", point.y)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise InstanceError(f"{where}location {int(bad[0])} has non-finite {name} coordinate")
    bad = np.flatnonzero(~(point.p >= 0) | ~np.isfinite(point.p))
    if bad.size:
        raise InstanceError(f"{where}location {int(bad[0])} has invalid probability {point.p[bad[0]]!r}")
    if not (math.isfinite(point.weight) and point.weight >= 0):
        raise InstanceError(f"{where}weight must be finite and nonnegative, got {point.weight!r}")


def _pad(point: UncertainPoint, m: int) -> UncertainPoint:
    # zero-probability copies of the last location leave every expected distance unchanged
    k = m - point.m
    if k == 0:
        return point
    return UncertainPoint(
        np.concatenate([point.x, np.full(k, point.x[-1])]),
        np.concatenate([point.y, np.full(k, point.y[-1])]),
        np.concatenate([point.p, np.zeros(k)]),
        point.weight,
    )


@dataclass(frozen=True)
class Instance:
    points: tuple[UncertainPoint, ...]
    metric: Metric = Metric.L1
    check_mass: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        pts = tuple(self.points)
        if not pts:
            raise InstanceError("an instance needs at least one uncertain point")
        for i, pt in enumerate(pts):
            _validate_point(pt, i)
        m = max(pt.m for pt in pts)
        pts = tuple(_pad(pt, m) for pt in pts)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "metric", Metric(self.metric))
        if self.check_mass:
            for i, pt in enumerate(pts):
                total = math.fsum(pt.p)
                if abs(total - 1.0) > 1e-6:
                    warnings.warn(
                        f"point {i}: probabilities sum to {total!r}, not 1",
                        ProbabilityMassWarning,
                        stacklevel=3,
                    )

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return self.points[0].m

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(X, Y, P, W)`` with shapes ``(n, m)`` and ``(n,)``."""
        X = np.stack([pt.x for pt in self.points])
        Y = np.stack([pt.y for pt in self.points])
        P = np.stack([pt.p for pt in self.points])
        W = np.array([pt.weight for pt in self.points])
        return X, Y, P, W

    @classmethod
    def from_arrays(
        cls,
        X: np.ndarray,
        Y: np.ndarray,
        P: np.ndarray,
        W: Sequence[float] | np.ndarray | None = None,
        metric: Metric | str = Metric.L1,
        check_mass: bool = True,
    ) -> "Instance":
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        P = np.asarray(P, dtype=np.float64)
        if W is None:
            W = np.ones(len(X))
        pts = tuple(UncertainPoint(X[i], Y[i], P[i], float(W[i])) for i in range(len(X)))
        return cls(pts, Metric(metric), check_mass)

    # -- JSON ----------------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "metric": self.metric.value,
            "points": [
                {
                    "weight": pt.weight,
                    "locations": [
                        {"x": float(a), "y": float(b), "p": float(c)} for a, b, c in zip(pt.x, pt.y, pt.p)
                    ],
                }
                for pt in self.points
            ],
        }

    @classmethod
    def from_json(cls, doc: Any, check_mass: bool = True) -> "Instance":
        if not isinstance(doc, dict):
            raise InstanceError("instance document must be a JSON object")
        metric = doc.get("metric", "l1")
        try:
            metric = Metric(metric)
        except ValueError:
            raise InstanceError(f"unknown metric {metric!r}; expected 'l1' or 'linf'") from None
        raw = doc.get("points")
        if not isinstance(raw, list) or not raw:
            raise InstanceError("'points' must be a nonempty list")
        pts = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, dict) or not isinstance(entry.get("locations"), list):
                raise InstanceError(f"point {i}: expected an object with a 'locations' list")
            try:
                locs = [(float(d["x"]), float(d["y"]), float(d["p"])) for d in entry["locations"]]
                weight = float(entry.get("weight", 1.0))
            except (KeyError, TypeError, ValueError) as exc:
                raise InstanceError(f"point {i}: malformed location ({exc})") from None
            pts.append(UncertainPoint.from_locations(locs, weight))
        return cls(tuple(pts), metric, check_mass)

    @classmethod
    def loads(cls, text: str, check_mass: bool = True) -> "Instance":
        return cls.from_json(json.loads(text), check_mass)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


# -- reductions ---------------------------------------------------------------


def apply_weight_reduction(instance: Instance) -> Instance:
    """Fold every weight into its point's probabilities."""
    if all(pt.weight == 1.0 for pt in instance.points):
        return instance
    pts = tuple(UncertainPoint(pt.x, pt.y, pt.weight * pt.p, 1.0) for pt in instance.points)
    return Instance(pts, instance.metric, check_mass=False)


@dataclass(frozen=True)
class Frame:
    """Records the map ``T(x, y) = (x + y, x - y)`` used for L-infinity input.

    L-infinity distances are half the L1 distances between mapped points, so
    the objective scales by ``objective_scale``.
    """

    objective_scale: float = 0.5

    @staticmethod
    def forward(x: Any, y: Any) -> tuple[Any, Any]:
        return x + y, x - y

    @staticmethod
    def inverse(u: Any, v: Any) -> tuple[Any, Any]:
        return (u + v) / 2, (u - v) / 2


def to_l1_frame(instance: Instance) -> tuple[Instance, Frame]:
    if instance.metric is not Metric.LINF:
        raise InstanceError("to_l1_frame expects an L-infinity instance")
    pts = []
    for pt in instance.points:
        u, v = Frame.forward(pt.x, pt.y)
        pts.append(UncertainPoint(u, v, pt.p, pt.weight))
    return Instance(tuple(pts), Metric.L1, check_mass=False), Frame()


# -- preprocessing ------------------------------------------------------------


def predecessor_index(sorted_values: Sequence[float], z: float) -> int:
    """Largest ``j`` with ``sorted_values[j] <= z``; index 0 holds ``-inf``."""
    return bisect_right(sorted_values, z) - 1


@dataclass(frozen=True, eq=False)
class PointPrep:
    xs: np.ndarray
    ys: np.ndarray
    ax: np.ndarray
    bx: np.ndarray
    ay: np.ndarray
    by: np.ndarray
    total_mass: float
    sum_fx: float
    sum_fy: float

    @property
    def m(self) -> int:
        return len(self.xs) - 1


def _axis_prefix(C: np.ndarray, P: np.ndarray, presorted: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, m = C.shape
    if presorted:
        cs, ps = C, P
    else:
        order = np.argsort(C, axis=1, kind="stable")
        cs = np.take_along_axis(C, order, axis=1)
        ps = np.take_along_axis(P, order, axis=1)
    coords = np.empty((n, m + 1))
    coords[:, 0] = NEG_INF
    coords[:, 1:] = cs
    a = np.zeros((n, m + 1))
    b = np.zeros((n, m + 1))
    np.cumsum(ps, axis=1, out=a[:, 1:])
    np.cumsum(ps * cs, axis=1, out=b[:, 1:])
    return coords, a, b


@dataclass(frozen=True, eq=False)
class PrepTable:
    """The preprocessing of all points stacked row-wise, shape ``(n, m + 1)``."""

    XS: np.ndarray
    YS: np.ndarray
    AX: np.ndarray
    BX: np.ndarray
    AY: np.ndarray
    BY: np.ndarray
    mass: np.ndarray
    sfx: np.ndarray
    sfy: np.ndarray

    @property
    def n(self) -> int:
        return self.XS.shape[0]

    @property
    def m(self) -> int:
        return self.XS.shape[1] - 1

    @classmethod
    def from_arrays(cls, X: np.ndarray, Y: np.ndarray, P: np.ndarray, presorted: bool = False) -> "PrepTable":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        if presorted and not (np.all(np.diff(X, axis=1) >= 0) and np.all(np.diff(Y, axis=1) >= 0)):
            raise InstanceError("presorted=True but coordinates are not ascending")
        # with presorted input the x and y lists share one location order
        XS, AX, BX = _axis_prefix(X, P, presorted)
        YS, AY, BY = _axis_prefix(Y, P, presorted)
        mass = AX[:, -1].copy()
        # y-order rounding may drift by an ulp; pin the last entry to the x-order total
        np.minimum(AY, mass[:, None], out=AY)
        AY[:, -1] = mass
        return cls(XS, YS, AX, BX, AY, BY, mass, BX[:, -1].copy(), BY[:, -1].copy())

    @classmethod
    def from_instance(cls, instance: Instance) -> "PrepTable":
        X, Y, P, W = instance.arrays()
        if np.any(W != 1.0):
            P = P * W[:, None]
        return cls.from_arrays(X, Y, P)

    def row(self, i: int) -> PointPrep:
        return PointPrep(
            self.XS[i], self.YS[i], self.AX[i], self.BX[i], self.AY[i], self.BY[i],
            float(self.mass[i]), float(self.sfx[i]), float(self.sfy[i]),
        )

    def take(self, idx: np.ndarray) -> "PrepTable":
        return PrepTable(*(getattr(self, f)[idx] for f in
                           ("XS", "YS", "AX", "BX", "AY", "BY", "mass", "sfx", "sfy")))


def build_prep(point: UncertainPoint, presorted: bool = False) -> PointPrep:
    """Sort one point's coordinates and build its prefix arrays.

    Weights are not applied here; run :func:`apply_weight_reduction` first.
    """
    _validate_point(point)
    return PrepTable.from_arrays(point.x, point.y, point.p, presorted=presorted).row(0)
