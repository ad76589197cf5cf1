"""Point-cloud representation, metric scaling, and similarity matrices.

A point cloud is an ordered finite subset of R^d with stable indices; the
similarity matrix at scale t has entries exp(-t * ||x_i - x_j||) and is
symmetric positive definite for distinct Euclidean points.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import DuplicatePoints, NonFinite

#: Absolute Euclidean distance below which two points count as duplicates.
#: The underlying theory gives no such tolerance; this is our choice.
DUPLICATE_TOL = 1e-12

_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class PointCloud:
    """Ordered finite set of points in R^d.

    ``points`` is an (N, d) float array. Index order is stable across all
    derived structures (weights, moments, hulls).
    """

    points: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValueError("points must be a nonempty (N, d) array")
        if not np.all(np.isfinite(pts)):
            raise NonFinite("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None and len(self.labels) != pts.shape[0]:
            raise ValueError("labels length must match point count")

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def diameter(self) -> float:
        return float(pairwise_distances(self).max())

    def subset(self, indices) -> "PointCloud":
        """Cloud restricted to ``indices``, preserving their order."""
        idx = np.asarray(indices, dtype=np.intp)
        labels = tuple(self.labels[i] for i in idx) if self.labels else None
        return PointCloud(self.points[idx], labels)

    def scale_coordinates(self, t: float) -> "PointCloud":
        """Cloud with every coordinate multiplied by t (the space tX)."""
        return PointCloud(self.points * float(t), self.labels)

    # -- serialization ----------------------------------------------------

    def to_csv(self, path, header: bool = True) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh, header=header)

    def write_csv(self, fh, header: bool = True) -> None:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"x{i}" for i in range(self.dim)])
        for row in self.points:
            writer.writerow([_FLOAT_FMT % v for v in row])

    @classmethod
    def from_csv(cls, path) -> "PointCloud":
        """Read one point per row; a non-numeric first row is a header."""
        with open(path, "r", newline="") as fh:
            return cls.read_csv(fh)

    @classmethod
    def read_csv(cls, fh) -> "PointCloud":
        rows = [r for r in csv.reader(fh) if r]
        if not rows:
            raise ValueError("empty CSV input")
        try:
            [float(v) for v in rows[0]]
        except ValueError:
            rows = rows[1:]
        if not rows:
            raise ValueError("CSV contains a header but no data rows")
        return cls(np.array([[float(v) for v in r] for r in rows]))

    def to_json(self) -> str:
        return json.dumps([[float(v) for v in row] for row in self.points])

    @classmethod
    def from_json(cls, text: str) -> "PointCloud":
        return cls(np.array(json.loads(text), dtype=np.float64))


@dataclass(frozen=True)
class SimilarityMatrix:
    """Dense N x N matrix exp(-t * distance), with scale t.

    Symmetric, unit diagonal, entries in (0, 1], positive definite.
    """

    entries: np.ndarray
    scale: float

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.entries, dtype=np.float64))
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def pairwise_distances(cloud: PointCloud) -> np.ndarray:
    """Symmetric Euclidean distance matrix with exactly zero diagonal.

    Uses the expansion ||a||^2 + ||b||^2 - 2 a.b with a clamp at zero so
    catastrophic cancellation cannot produce NaN.
    """
    pts = cloud.points
    sq = np.einsum("ij,ij->i", pts, pts)
    gram = pts @ pts.T
    d2 = sq[:, None] + sq[None, :] - 2.0 * gram
    d2 = 0.5 * (d2 + d2.T)  # force exact symmetry
    np.clip(d2, 0.0, None, out=d2)
    dist = np.sqrt(d2)
    np.fill_diagonal(dist, 0.0)
    if not np.all(np.isfinite(dist)):
        raise NonFinite("non-finite pairwise distance")
    return dist


def check_distinct(cloud: PointCloud, dist: np.ndarray | None = None) -> np.ndarray:
    """Raise DuplicatePoints if any two points are closer than DUPLICATE_TOL."""
    if dist is None:
        dist = pairwise_distances(cloud)
    if cloud.size > 1:
        off = dist + np.diag(np.full(cloud.size, np.inf))
        i, j = np.unravel_index(np.argmin(off), off.shape)
        if off[i, j] < DUPLICATE_TOL:
            raise DuplicatePoints(
                f"points {i} and {j} are {off[i, j]:.3e} apart "
                f"(tolerance {DUPLICATE_TOL:g})"
            )
    return dist


def build_similarity(cloud: PointCloud, t: float) -> SimilarityMatrix:
    """Similarity matrix of the scaled space tX: exp(-t * distance)."""
    if t <= 0 or not np.isfinite(t):
        raise ValueError("scale t must be positive and finite")
    dist = check_distinct(cloud)
    entries = np.exp(-float(t) * dist)
    np.fill_diagonal(entries, 1.0)
    return SimilarityMatrix(entries, float(t))
