"""Rectilinear one-center of uncertain points in linear time."""

from .envelope import Plane, ed_max, expected_distance, plane_for_cell
from .model import (
    Instance,
    InstanceError,
    Location,
    Metric,
    PointPrep,
    PrepTable,
    UncertainPoint,
    apply_weight_reduction,
    build_prep,
    to_l1_frame,
)
from .oracle import OracleSizeError, ed_max_direct, enumerate_all_planes, oracle_center, oracle_center_approx
from .solver import SolveResult, SolverConfig, solve

__all__ = [
    "Instance", "InstanceError", "Location", "Metric", "OracleSizeError", "Plane", "PointPrep",
    "PrepTable", "SolveResult", "SolverConfig", "UncertainPoint", "apply_weight_reduction",
    "build_prep", "ed_max", "ed_max_direct", "enumerate_all_planes", "expected_distance",
    "oracle_center", "oracle_center_approx", "plane_for_cell", "solve", "to_l1_frame",
]
