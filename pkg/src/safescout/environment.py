"""Partitioned environment: Voronoi centers and the per-cell trust parameters.

Cells are never built explicitly. A point belongs to the cell of its
strictly nearest center, so every algorithm works on the centers alone.
Cell indices are 0-based throughout the Python API.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionMismatchError

SUPPORTED_DIMENSIONS = (2, 3)


@dataclass(frozen=True, eq=False)
class EnvironmentSpec:
    """Voronoi centers in R^d plus the ground-truth success probability of each cell.

    ``true_p`` is the oracle's secret; learners only see it through
    :class:`safescout.oracle.TrustOracle`.
    """

    dimension: int
    centers: np.ndarray
    true_p: np.ndarray

    def __post_init__(self):
        centers = np.array(self.centers, dtype=float, ndmin=2)
        true_p = np.array(self.true_p, dtype=float).reshape(-1)
        centers.setflags(write=False)
        true_p.setflags(write=False)
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "true_p", true_p)

    @property
    def n_cells(self):
        return len(self.true_p)

    def __eq__(self, other):
        if not isinstance(other, EnvironmentSpec):
            return NotImplemented
        return (self.dimension == other.dimension
                and np.array_equal(self.centers, other.centers)
                and np.array_equal(self.true_p, other.true_p))

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "centers": self.centers.tolist(),
            "true_p": self.true_p.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(dimension=data["dimension"], centers=data["centers"],
                   true_p=data["true_p"])


class NearestCenter(NamedTuple):
    index: int
    boundary: bool


def nearest_center(point, env):
    """Return the index of the nearest center and whether ``point`` sits on a cell boundary.

    Exact distance ties resolve to the lowest index with ``boundary=True``;
    such points belong to no open Voronoi cell.
    """
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.shape[0] != env.dimension or env.centers.shape[1] != env.dimension:
        raise DimensionMismatchError(
            f"point has dimension {point.shape[0]}, environment has {env.dimension}")
    sq_dist = np.sum((env.centers - point) ** 2, axis=1)
    best = int(np.argmin(sq_dist))
    boundary = int(np.count_nonzero(sq_dist == sq_dist[best])) > 1
    return NearestCenter(best, boundary)


def validate(env):
    """List every violated invariant of ``env``; an empty list means the environment is valid."""
    problems = []
    if env.dimension not in SUPPORTED_DIMENSIONS:
        problems.append(f"dimension must be 2 or 3, got {env.dimension}")
    centers, true_p = env.centers, env.true_p
    if centers.ndim != 2 or centers.shape[1] != env.dimension:
        problems.append("center coordinates do not match the dimension")
    if not np.all(np.isfinite(centers)):
        problems.append("center coordinates must be finite")
    if len(centers) != len(true_p):
        problems.append("number of centers and probabilities differ")
    if len(true_p) < 2:
        problems.append("at least 2 cells are required")
    if len(np.unique(centers, axis=0)) != len(centers):
        problems.append("centers not pairwise distinct")
    if np.any(~np.isfinite(true_p)) or np.any(true_p < 0.0) or np.any(true_p > 1.0):
        problems.append("probability out of range")
    return problems


def grid_environment(true_p, spacing=1.0, dimension=2):
    """Lay out ``len(true_p)`` centers row by row on a square grid."""
    true_p = np.asarray(true_p, dtype=float)
    side = int(np.ceil(np.sqrt(len(true_p))))
    idx = np.arange(len(true_p))
    coords = [idx % side * spacing, idx // side * spacing]
    if dimension == 3:
        coords.append(np.zeros(len(true_p)))
    return EnvironmentSpec(dimension, np.column_stack(coords), true_p)


TABLE1_TRUE_P = (0.9, 0.84, 0.58, 0.79, 0.6, 0.75, 0.54, 0.72, 0.56)
TABLE1_FINAL_ESTIMATES = (0.91, 0.85, 0.625, 0.80, 0.525, 0.7625, 0.575, 0.7375, 0.475)
TABLE1_SNAPSHOT_350 = (0.875, 0.80, 0.625, 0.775, 0.525, 0.725, 0.575, 0.675, 0.475)


def table1_environment():
    """Nine-cell example environment on a 3x3 grid with the reference trust parameters."""
    return grid_environment(TABLE1_TRUE_P)
