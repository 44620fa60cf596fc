"""Conservative safe action sets for a polytopic response constraint.

With the response constraint {y : F y <= g} and row-wise parameter
uncertainty, the worst case of F_j . (Theta x) over the uncertainty set
has a closed form, so membership in the conservative sets is an exact
O(q n) predicate rather than an inner optimization. All predicates are
read-only and vectorized over candidate actions.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import estimation, geometry
from .errors import ConfigError


@dataclass(frozen=True)
class ActionBox:
    """Axis-aligned action set with its Euclidean radius bound."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).ravel()
        upper = np.asarray(self.upper, dtype=float).ravel()
        if lower.shape != upper.shape:
            raise ValueError("bound vectors must have equal length")
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ValueError("box bounds must be finite")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return self.lower.shape[0]

    @property
    def corner_norm(self):
        """max ||x||_2 over the box, attained at a corner."""
        return float(np.linalg.norm(np.maximum(np.abs(self.lower),
                                               np.abs(self.upper))))

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        return np.all((x >= self.lower - tol) & (x <= self.upper + tol),
                      axis=-1)

    def clip(self, X):
        return np.clip(np.asarray(X, dtype=float), self.lower, self.upper)

    def clearance(self, x):
        """Distance from x to the nearest face (negative outside)."""
        x = np.asarray(x, dtype=float)
        return float(np.minimum(self.upper - x, x - self.lower).min())

    def grid(self, per_axis):
        """Uniform lattice with per_axis points along every axis."""
        if per_axis < 2:
            raise ValueError("need at least two points per axis")
        axes = [np.linspace(lo, hi, per_axis)
                for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def _g0_row_terms(safety, S):
    return S * np.abs(safety.A).sum(axis=1)


def g0_margins(X, safety, S):
    """Per-point slack of the tightest row of the known-ball safe test.

    Worst case of F_j . (Theta x) over all Theta with row norms <= S is
    S ||x||_2 sum_i |F_ji|, so the margin is exact.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    norms = np.linalg.norm(X, axis=1)
    lhs = norms[:, None] * _g0_row_terms(safety, S)[None, :]
    return (safety.b[None, :] - lhs).min(axis=1)


def in_G0(x, safety, S):
    """Safe under every parameter the prior bound allows."""
    return bool(g0_margins(x, safety, S)[0] >= 0.0)


def gt_margins(X, conf, safety):
    """Per-point slack of the tightest row of the confidence-set safe test.

    sup over the row-wise ellipsoids of F_j . (Theta x) equals
    F_j . (theta_hat x) + sqrt(beta_t) ||x||_{V^-1} sum_i |F_ji|,
    so the conservative test is exact for polytopic response constraints,
    with no inner optimization.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    predicted = (safety.A @ conf.theta_hat) @ X.T      # (q, N)
    widths = np.abs(safety.A).sum(axis=1)              # (q,)
    wn = estimation.weighted_norms(conf, X)            # (N,)
    lhs = predicted + conf.beta_sqrt * widths[:, None] * wn[None, :]
    return (safety.b[:, None] - lhs).min(axis=0)


def in_Gt(x, conf, safety):
    return bool(gt_margins(x, conf, safety)[0] >= 0.0)


def safety_margin(x, conf, safety):
    """Signed slack of the tightest row; nonnegative iff `in_Gt`."""
    return float(gt_margins(x, conf, safety)[0])


def check_safety_polytope(poly):
    """Validate that a response constraint set is compact with interior."""
    if not geometry.is_bounded(poly):
        raise ConfigError("safety set must be bounded")
    if geometry.max_shrinkage(poly, geometry.L2) <= 0.0:
        raise ConfigError("safety set must have nonempty interior")


def find_g0_witness(safety, S, box, per_axis=9):
    """An interior point of the initial safe set, or a configuration error.

    Searches the origin, the box center, the corners, and a coarse grid
    for the point with the largest positive margin. Absence of a witness
    means the problem violates the nonempty-interior assumption on the
    initial safe set and no safe exploration is possible.
    """
    candidates = [box.clip(np.zeros(box.dim)), box.center]
    corners = np.array(list(itertools.product(*zip(box.lower, box.upper))))
    candidates.append(corners)
    candidates.append(box.grid(per_axis))
    points = np.vstack([np.atleast_2d(c) for c in candidates])
    margins = g0_margins(points, safety, S)
    best = int(np.argmax(margins))
    if margins[best] <= 0.0:
        raise ConfigError(
            "initial safe set has no interior point on the search grid; "
            "the safety set is too tight for the prior parameter bound")
    return points[best], float(margins[best])
