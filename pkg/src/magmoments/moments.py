"""Per-point moments: weighted quadrature of squared weights over scale.

The zeroth moment of a point x is

    mu_0(x) = integral_0^inf e^{-t} w_t(x)^2 dt

a scale-free importance score that is larger for extremal points. The
generalized moments mu_n insert a factor t^n, and the shifted Laplace
transform inserts e^{-s t}. All of them discretize the integral with a
Gauss-Laguerre rule whose weights absorb the e^{-t} factor.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_laguerre

from .errors import FactorizationFailure, QuadratureDivergence
from .geometry import PointCloud, pairwise_distances
from .magnitude import weights_at_scale

#: Nodes with t * diameter beyond this would underflow exp(-t*d); the
#: weight vector there is 1 to machine precision, so it is substituted
#: analytically instead of solving an ill-scaled system.
UNDERFLOW_EXPONENT = 700.0

DEFAULT_ORDER = 64

#: Relative change on order doubling beyond which the rule is rejected.
DIVERGENCE_TOL = 1e-4


@dataclass(frozen=True)
class QuadratureRule:
    """Positive nodes t_k and weights omega_k for integrals against e^{-t}.

    The weight function is absorbed into omega_k, so
    integral_0^inf e^{-t} f(t) dt ~= sum_k omega_k f(t_k).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    order: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-D and equal length")
        if np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be positive and strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if self.kind == "gauss-laguerre" and abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("gauss-laguerre weights must sum to 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)


def gauss_laguerre_rule(order: int = DEFAULT_ORDER) -> QuadratureRule:
    nodes, weights = roots_laguerre(order)
    return QuadratureRule(nodes, weights, "gauss-laguerre", order)


def log_trapezoid_rule(
    order: int = 2000, lo: float = 1e-6, hi: float = 50.0
) -> QuadratureRule:
    """Trapezoid rule on log-spaced nodes, e^{-t} folded into the weights.

    The truncated tail beyond ``hi`` contributes at most e^{-hi} * sup f.
    """
    nodes = np.logspace(np.log10(lo), np.log10(hi), order)
    weights = np.empty(order)
    gaps = np.diff(nodes)
    weights[0] = gaps[0] / 2
    weights[-1] = gaps[-1] / 2
    weights[1:-1] = (gaps[:-1] + gaps[1:]) / 2
    weights *= np.exp(-nodes)
    return QuadratureRule(nodes, weights, "log-trapezoid", order)


@dataclass(frozen=True)
class MomentVector:
    """Per-point mu_0 values with the rule that produced them."""

    mu0: np.ndarray
    rule: QuadratureRule
    estimated_error: float

    def __post_init__(self):
        mu0 = np.asarray(self.mu0, dtype=np.float64)
        if np.any(mu0 < 0) or not np.all(np.isfinite(mu0)):
            raise ValueError("moments must be finite and nonnegative")
        mu0.setflags(write=False)
        object.__setattr__(self, "mu0", mu0)


def _squared_weights_at_nodes(
    cloud: PointCloud, nodes: np.ndarray, threads: int = 1
) -> np.ndarray:
    """w_{t_k}(x_i)^2 as a (order, N) array, with the underflow guard."""
    diameter = float(pairwise_distances(cloud).max()) if cloud.size > 1 else 0.0

    def one(t: float) -> np.ndarray:
        if t * diameter > UNDERFLOW_EXPONENT or cloud.size == 1:
            return np.ones(cloud.size)
        try:
            return weights_at_scale(cloud, t).weights ** 2
        except FactorizationFailure as exc:
            raise FactorizationFailure(f"at quadrature node t={t}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, nodes))
    else:
        rows = [one(t) for t in nodes]
    # Stacking in node order keeps the reduction deterministic regardless
    # of completion order.
    return np.vstack(rows)


def _integrate(rule: QuadratureRule, factor: np.ndarray, wsq: np.ndarray) -> np.ndarray:
    return (rule.weights * factor) @ wsq


def zeroth_moments(
    cloud: PointCloud,
    rule: QuadratureRule | None = None,
    threads: int = 1,
    estimate_error: bool = True,
) -> MomentVector:
    """mu_0 for every point: sum_k omega_k w_{t_k}(x_i)^2.

    The error estimate compares against the rule of double order; a
    relative change above DIVERGENCE_TOL raises QuadratureDivergence.
    """
    if rule is None:
        rule = gauss_laguerre_rule()
    wsq = _squared_weights_at_nodes(cloud, rule.nodes, threads)
    mu0 = _integrate(rule, np.ones(rule.order), wsq)
    err = np.nan
    if estimate_error:
        fine = _double_order(rule)
        wsq_fine = _squared_weights_at_nodes(cloud, fine.nodes, threads)
        mu0_fine = _integrate(fine, np.ones(fine.order), wsq_fine)
        diff = np.abs(mu0 - mu0_fine)
        err = float(diff.max())
        rel = diff / np.maximum(np.abs(mu0_fine), 1e-300)
        if rel.max() > DIVERGENCE_TOL:
            raise QuadratureDivergence(
                f"order doubling changed mu_0 by {rel.max():.3e} relative"
            )
    return MomentVector(mu0, rule, err)


def _double_order(rule: QuadratureRule) -> QuadratureRule:
    if rule.kind == "gauss-laguerre":
        return gauss_laguerre_rule(2 * rule.order)
    return log_trapezoid_rule(2 * rule.order, rule.nodes[0], rule.nodes[-1])


def higher_moments(
    cloud: PointCloud, n: int, rule: QuadratureRule | None = None, threads: int = 1
) -> np.ndarray:
    """mu_n: sum_k omega_k t_k^n w_{t_k}(x_i)^2."""
    if n < 0:
        raise ValueError("moment order n must be nonnegative")
    if rule is None:
        rule = gauss_laguerre_rule()
    wsq = _squared_weights_at_nodes(cloud, rule.nodes, threads)
    return _integrate(rule, rule.nodes**n, wsq)


def laplace_moment(
    cloud: PointCloud, s: float, rule: QuadratureRule | None = None, threads: int = 1
) -> np.ndarray:
    """Shifted Laplace transform of w_t^2: sum_k omega_k e^{-s t_k} w^2."""
    if s < 0:
        raise ValueError("shift s must be nonnegative")
    if rule is None:
        rule = gauss_laguerre_rule()
    wsq = _squared_weights_at_nodes(cloud, rule.nodes, threads)
    return _integrate(rule, np.exp(-s * rule.nodes), wsq)


def magnitude_moment(
    cloud: PointCloud, rule: QuadratureRule | None = None, threads: int = 1
) -> float:
    """Integral of e^{-t} |tX| dt, discretized over the rule's nodes."""
    if rule is None:
        rule = gauss_laguerre_rule()
    diameter = float(pairwise_distances(cloud).max()) if cloud.size > 1 else 0.0

    def mag(t: float) -> float:
        if t * diameter > UNDERFLOW_EXPONENT or cloud.size == 1:
            return float(cloud.size)
        return weights_at_scale(cloud, t).magnitude

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = np.fromiter(pool.map(mag, rule.nodes), dtype=np.float64)
    else:
        values = np.fromiter((mag(t) for t in rule.nodes), dtype=np.float64)
    return float(rule.weights @ values)
