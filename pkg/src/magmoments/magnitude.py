"""Weight-vector solves, magnitude values, and the magnitude function.

The weight vector of a cloud at scale t solves zeta w = 1; the magnitude
|tX| is the sum of the weights. Solves go through a Cholesky (SPD)
factorization, never an explicit inverse.
"""

from __future__ import annotations

import hashlib
import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import FactorizationFailure, NonRepresentable
from .geometry import PointCloud, SimilarityMatrix, build_similarity

#: Smallest admissible squared Cholesky pivot; below this the matrix is
#: treated as numerically indefinite (near-duplicate points or extreme N*t).
PIVOT_FLOOR = 1e-14

#: Residual infinity-norm budget per point: eps_solve = RESIDUAL_BUDGET * N.
RESIDUAL_BUDGET = 1e-9


@dataclass(frozen=True)
class WeightVector:
    """Per-point weights w = zeta^{-1} 1 at scale t, with their sum."""

    weights: np.ndarray
    scale: float
    magnitude: float

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def _cholesky_lower(matrix: np.ndarray) -> np.ndarray:
    try:
        lower = scipy.linalg.cholesky(matrix, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise FactorizationFailure(f"Cholesky factorization failed: {exc}") from exc
    pivots = np.diag(lower)
    if pivots.min() ** 2 < PIVOT_FLOOR:
        raise FactorizationFailure(
            f"Cholesky pivot {pivots.min()**2:.3e} below floor {PIVOT_FLOOR:g}"
        )
    return lower


def solve_weights(sim: SimilarityMatrix) -> WeightVector:
    """Solve zeta w = 1 via Cholesky and return the weight vector.

    One step of iterative refinement is applied if the residual exceeds
    the budget; a residual still over budget is a hard error.
    """
    a = sim.entries
    n = a.shape[0]
    lower = _cholesky_lower(a)
    ones = np.ones(n)
    w = scipy.linalg.cho_solve((lower, True), ones, check_finite=False)
    budget = RESIDUAL_BUDGET * n
    residual = ones - a @ w
    if np.abs(residual).max() > budget:
        w = w + scipy.linalg.cho_solve((lower, True), residual, check_finite=False)
        residual = ones - a @ w
        if np.abs(residual).max() > budget:
            raise FactorizationFailure(
                f"solve residual {np.abs(residual).max():.3e} exceeds "
                f"budget {budget:.3e} after refinement"
            )
    return WeightVector(w, sim.scale, float(w.sum()))


# Per-(cloud, t) result cache so quadratures that repeat scales reuse solves.
_CACHE_MAX = 256
_weight_cache: OrderedDict = OrderedDict()


def _cloud_key(cloud: PointCloud) -> bytes:
    return hashlib.sha1(cloud.points.tobytes()).digest()


def weights_at_scale(cloud: PointCloud, t: float) -> WeightVector:
    """solve_weights(build_similarity(cloud, t)) with a small LRU cache."""
    key = (_cloud_key(cloud), float(t))
    hit = _weight_cache.get(key)
    if hit is not None:
        _weight_cache.move_to_end(key)
        return hit
    result = solve_weights(build_similarity(cloud, t))
    _weight_cache[key] = result
    if len(_weight_cache) > _CACHE_MAX:
        _weight_cache.popitem(last=False)
    return result


def magnitude_function(cloud: PointCloud, scales) -> list[tuple[float, float]]:
    """Evaluate t -> |tX| at each scale, in input order.

    ``t = inf`` is answered with N directly (the t -> infinity limit)
    rather than solving a system.
    """
    scales = list(scales)
    if not scales:
        raise ValueError("scales must be nonempty")
    out = []
    for t in scales:
        if math.isinf(t) and t > 0:
            out.append((float(t), float(cloud.size)))
            continue
        if t <= 0:
            raise ValueError(f"scale t={t} must be positive")
        try:
            out.append((float(t), weights_at_scale(cloud, t).magnitude))
        except FactorizationFailure as exc:
            raise FactorizationFailure(f"at scale t={t}: {exc}") from exc
    return out


def log_weight_coloring(weights: WeightVector) -> np.ndarray:
    """Elementwise log(1 + w), the coloring used for weight plots."""
    w = weights.weights
    if np.any(w <= -1.0):
        raise NonRepresentable("log(1 + w) undefined for weights <= -1")
    return np.log1p(w)
