"""Moment-ordered filtering of a point cloud before hull computation.

Points are sorted ascending by their zeroth moment and the longest prefix
whose moments stay under the budget threshold eps / (d * i * |X|) is
removed; the hull is computed on what remains. Low-moment points are
interior, so dropping them barely changes the hull.

Two threshold conventions are available:

* ``derived`` (default): the maximum removed moment mu_0(x_{i-1}) is
  tested against eps / (d * i * |X|) with i the removed count. This is
  the form the restriction bound actually controls.
* ``paper``: the literal published step, testing the first kept point's
  moment mu_0(x_i) against the same threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PointCloud, pairwise_distances
from .hull_exact import Facet, HullResult, affine_rank, convex_hull
from .magnitude import weights_at_scale
from .moments import MomentVector, QuadratureRule, zeroth_moments

CONVENTIONS = ("derived", "paper")


@dataclass(frozen=True)
class FilterReport:
    """Outcome of moment filtering: kept/removed split and threshold data."""

    kept_indices: tuple
    removed_indices: tuple
    epsilon: float
    threshold_curve: tuple
    magnitude_at_one: float
    convention: str = "derived"


def _ascending_order(mu0: np.ndarray) -> np.ndarray:
    # Stable sort: moment ties broken by original index for determinism.
    return np.argsort(mu0, kind="stable")


def filter_by_moment(
    cloud: PointCloud,
    moments: MomentVector,
    epsilon: float,
    convention: str = "derived",
    magnitude_at_one: float | None = None,
) -> FilterReport:
    """Remove the longest low-moment prefix admitted by the budget epsilon.

    The threshold denominator uses the cloud's magnitude at scale t=1.
    Removal never goes below d+1 kept points so the returned set can
    still carry a full-dimensional hull.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown threshold convention {convention!r}")
    n = cloud.size
    d = cloud.dim
    if moments.mu0.shape[0] != n:
        raise ValueError("moment vector does not match cloud size")
    if magnitude_at_one is None:
        magnitude_at_one = weights_at_scale(cloud, 1.0).magnitude

    order = _ascending_order(moments.mu0)
    mu_sorted = moments.mu0[order]
    max_removed = max(n - (d + 1), 0)

    def threshold(i: int) -> float:
        return epsilon / (d * i * magnitude_at_one) if i > 0 else math.inf

    if math.isinf(epsilon):
        removed_count = max_removed
    elif convention == "derived":
        # Predicate: max removed moment mu_sorted[i-1] <= threshold(i).
        # mu_sorted is nondecreasing and the threshold decreases in i, so
        # the admissible i form a prefix; binary search for its end.
        removed_count = _largest_true(
            lambda i: mu_sorted[i - 1] <= threshold(i), max_removed
        )
    else:
        # Literal published step: largest i with mu_0(x_i) <= threshold(i),
        # testing the first kept point; removed set is x_0 .. x_{i-1}.
        removed_count = _largest_true(
            lambda i: mu_sorted[i] <= threshold(i), max_removed
        )

    removed = tuple(int(v) for v in order[:removed_count])
    kept = tuple(int(v) for v in order[removed_count:])
    curve = tuple(
        (i, float(mu_sorted[i - 1]), threshold(i)) for i in range(1, n + 1)
    )
    return FilterReport(
        kept, removed, float(epsilon), curve, float(magnitude_at_one), convention
    )


def _largest_true(predicate, hi: int) -> int:
    """Largest i in [0, hi] with predicate(i) true; predicate(0) is true."""
    lo = 0
    high = hi
    while lo < high:
        mid = (lo + high + 1) // 2
        if predicate(mid):
            lo = mid
        else:
            high = mid - 1
    return lo


def approximate_hull(
    cloud: PointCloud,
    epsilon: float,
    rule: QuadratureRule | None = None,
    convention: str = "derived",
    threads: int = 1,
) -> tuple[HullResult, FilterReport]:
    """Moment-filter the cloud, then hull only the kept points.

    Vertex and facet indices in the result refer to the original cloud.
    """
    moments = zeroth_moments(cloud, rule, threads=threads, estimate_error=False)
    report = filter_by_moment(cloud, moments, epsilon, convention)
    kept = list(report.kept_indices)
    sub = cloud.subset(kept)
    hull = convex_hull(sub)
    remap = np.asarray(kept, dtype=np.intp)
    facets = tuple(
        Facet(tuple(int(remap[v]) for v in f.vertex_indices), f.normal, f.offset)
        for f in hull.facets
    )
    hull = HullResult(
        tuple(sorted(int(remap[v]) for v in hull.vertex_indices)),
        facets,
        hull.volume,
        hull.dim,
        cloud.points,
        hull.degenerate,
    )
    return hull, report


def moment_prefix_curve(
    cloud: PointCloud, moments: MomentVector
) -> list[tuple[int, float, float]]:
    """(i, Vol(Conv(X_<=i)), |X_<=i|) for prefixes in descending moment order.

    Volumes are zero until the prefix spans d affinely independent
    directions, then maintained incrementally through Qhull. Magnitudes
    are maintained through a growing Cholesky factor: appending a point
    costs O(i^2), so the whole curve costs O(N^2) beyond the hull work.
    """
    from scipy.linalg import solve_triangular
    from scipy.spatial import ConvexHull, QhullError

    n = cloud.size
    d = cloud.dim
    order = _ascending_order(moments.mu0)[::-1]
    prefix_cloud = cloud.subset(order)
    pts = prefix_cloud.points
    sim = np.exp(-pairwise_distances(prefix_cloud))
    np.fill_diagonal(sim, 1.0)

    curve = []
    lower = np.zeros((n, n))
    y = np.zeros(n)  # y = L^{-1} 1 on the current prefix
    magnitude = 0.0
    qh = None
    volume = 0.0
    for i in range(n):
        a = sim[i, :i]
        if i == 0:
            c = np.zeros(0)
        else:
            c = solve_triangular(lower[:i, :i], a, lower=True, check_finite=False)
        pivot_sq = 1.0 - c @ c
        pivot = math.sqrt(max(pivot_sq, 1e-30))
        lower[i, :i] = c
        lower[i, i] = pivot
        y[i] = (1.0 - c @ y[:i]) / pivot
        magnitude += y[i] ** 2

        size = i + 1
        if qh is None and size >= d + 1 and affine_rank(pts[:size]) == d:
            try:
                qh = ConvexHull(pts[:size], incremental=True)
                volume = qh.volume
            except QhullError:
                qh = None
        elif qh is not None:
            qh.add_points(pts[i : i + 1])
            volume = qh.volume
        curve.append((size, float(volume), float(magnitude)))
    if qh is not None:
        qh.close()
    return curve
