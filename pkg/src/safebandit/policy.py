"""Action selection: the safe pure-exploration sampler, the phase
schedule, and optimistic selection over a candidate grid.

The optimistic objective for a linear reward is evaluated in closed form
over the confidence set (default) or by enumerating the vertices of the
per-row l1 outer approximation (the scheme used in the reference
experiments); both are exact maximizations over their respective
parameter sets for each fixed candidate action.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import estimation, safesets
from .errors import ConfigError, EmptySafeSetError, ScheduleError

EXACT_MODE = "exact"
L1_MODE = "l1"


@dataclass(frozen=True)
class ExplorationSampler:
    """Uniform sampling on a sphere of radius r/2 around a safe center.

    The open ball center + B_2(r) must lie inside the initial safe set;
    draws then sit on the r/2 sphere, giving a sample second moment with
    smallest eigenvalue r^2/(4d) > 0.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).ravel()
        if not np.isfinite(center).all():
            raise ValueError("sampler center must be finite")
        if self.radius < 0:
            raise ValueError("sampler radius must be nonnegative")
        object.__setattr__(self, "center", center)

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def lambda_minus(self):
        return self.radius ** 2 / (4.0 * self.dim)

    def sample(self, rng):
        u = rng.standard_normal(self.dim)
        norm = np.linalg.norm(u)
        while norm < 1e-12:  # essentially never
            u = rng.standard_normal(self.dim)
            norm = np.linalg.norm(u)
        return self.center + (self.radius / 2.0) * (u / norm)

    def validate(self, safety, S, box, n_checks=64):
        """Spot-check that the sampling sphere sits inside the initial safe set."""
        if not safesets.in_G0(self.center, safety, S) or not box.contains(self.center):
            raise ConfigError("sampler center is outside the initial safe set")
        rng = np.random.default_rng(0)
        for _ in range(n_checks):
            x = self.sample(rng)
            if not (safesets.in_G0(x, safety, S) and box.contains(x)):
                raise ConfigError("sampler sphere leaves the initial safe set")
        return self


def fit_exploration_sampler(safety, S, box, fraction=0.98, per_axis=5):
    """Construct a validated sampler inside the initial safe set.

    For a polytopic response constraint the initial safe set is the
    intersection of the action box with a centered Euclidean ball of
    radius min_j g_j / (S sum_i |F_ji|); the sampler center is chosen to
    maximize the inscribed-ball radius over a small candidate set.
    """
    rowabs = np.abs(safety.A).sum(axis=1)
    active = rowabs > 0.0
    if np.any(safety.b[~active] < 0.0):
        raise ConfigError("safety set is empty (contradictory trivial row)")
    if not active.any():
        raise ConfigError("safety set has no effective rows")
    rho = float(np.min(safety.b[active] / rowabs[active])) / S
    if rho <= 0.0:
        raise ConfigError("initial safe set has empty interior: no ball of "
                          "positive radius is safe under the prior bound")
    candidates = np.vstack([
        np.atleast_2d(box.clip(np.zeros(box.dim))),
        np.atleast_2d(box.center),
        box.grid(per_axis),
    ])
    avail = np.minimum(
        rho - np.linalg.norm(candidates, axis=1),
        np.array([box.clearance(c) for c in candidates]),
    )
    best = int(np.argmax(avail))
    if avail[best] <= 0.0:
        raise ConfigError("no ball inside both the action box and the "
                          "initial safe set; assumption on the initial set fails")
    sampler = ExplorationSampler(candidates[best], fraction * float(avail[best]))
    return sampler.validate(safety, S, box)


@dataclass(frozen=True)
class Schedule:
    """Phase split and the constants that justify it."""

    T: int
    T_prime: int
    t_delta: float
    t_h: float
    H_inf: float
    lambda_minus: float
    mode: str


def schedule(T, params, H_inf, lambda_minus, mode="theory", override=None):
    """Compute the exploration length T' and its supporting constants.

    t_delta = (8 L^2 / lambda_-) log(d / delta) guards the minimum-eigenvalue
    event; t_h = 8 beta_T L^2 / (lambda_- H_inf^2) - 2 nu / lambda_- keeps the
    shrinkage argument of the regret bound inside its domain. In `theory`
    mode T' = ceil(max(T^{2/3}, t_delta, t_h)); `override` mode uses the
    given T' and simply reports the constants. Either way T' must stay
    below T.
    """
    if H_inf <= 0 or lambda_minus <= 0:
        raise ValueError("H_inf and lambda_minus must be positive")
    beta_T = estimation.beta_sqrt_value(params, T) ** 2
    L2 = params.L ** 2
    t_delta = (8.0 * L2 / lambda_minus) * math.log(params.d / params.delta)
    t_h = 8.0 * beta_T * L2 / (lambda_minus * H_inf ** 2) \
        - 2.0 * params.nu / lambda_minus
    if mode == "theory":
        T_prime = int(math.ceil(max(T ** (2.0 / 3.0), t_delta, t_h)))
    elif mode == "override":
        if override is None:
            raise ValueError("override mode needs an explicit T'")
        T_prime = int(override)
    else:
        raise ValueError(f"unknown schedule mode {mode!r}")
    if not 1 <= T_prime < T:
        raise ScheduleError(
            f"exploration length T'={T_prime} infeasible for horizon T={T}")
    return Schedule(T=int(T), T_prime=T_prime, t_delta=t_delta, t_h=t_h,
                    H_inf=float(H_inf), lambda_minus=float(lambda_minus),
                    mode=mode)


@dataclass(frozen=True)
class CandidateGrid:
    """A rectangular lattice of candidate actions inside the box."""

    points: np.ndarray
    spacing: np.ndarray
    per_axis: int
    box: safesets.ActionBox

    @classmethod
    def uniform(cls, box, per_axis):
        pts = box.grid(per_axis)
        spacing = (box.upper - box.lower) / (per_axis - 1)
        return cls(points=pts, spacing=spacing, per_axis=per_axis, box=box)


def refine_candidates(grid, around, shrink_factor):
    """Same-cardinality lattice around a point with spacing scaled down.

    Each refinement multiplies the cell size by `shrink_factor`; the
    window is clipped to the action box, and with an odd point count the
    center point survives clipping, so repeated refinement never loses
    the incumbent.
    """
    around = np.asarray(around, dtype=float).ravel()
    new_spacing = grid.spacing * shrink_factor
    k = grid.per_axis
    steps = np.arange(k) - (k - 1) / 2.0
    axes = [around[i] + new_spacing[i] * steps for i in range(grid.box.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = grid.box.clip(np.stack([m.ravel() for m in mesh], axis=1))
    return CandidateGrid(points=pts, spacing=new_spacing, per_axis=k,
                         box=grid.box)


@dataclass(frozen=True)
class OptimisticChoice:
    x: np.ndarray
    theta_tilde: np.ndarray
    value: float


def select_optimistic(conf, safety, a, candidates, mode=EXACT_MODE,
                      l1_radius=None):
    """Best optimistic (action, parameter) pair on a candidate grid.

    exact mode: value(x) = a . (theta_hat x) + sqrt(beta) ||x||_{V^-1} ||a||_1,
    the exact supremum of the linear reward over the row-wise confidence
    ellipsoids; the maximizing parameter is reconstructed per row.

    l1 mode: enumerate each row's l1 outer-approximation vertices and pick
    the best vertex per row (the reward is separable across rows), which
    reproduces the vertex-enumeration selection scheme.

    Ties break toward the lowest candidate index. Raises
    :class:`EmptySafeSetError` when no candidate passes the safe test.
    """
    a = np.asarray(a, dtype=float).ravel()
    X = candidates.points if isinstance(candidates, CandidateGrid) else np.atleast_2d(candidates)
    margins = safesets.gt_margins(X, conf, safety)
    safe = margins >= 0.0
    if not safe.any():
        raise EmptySafeSetError("no grid candidate passes the conservative "
                                "safety test")
    Xs = X[safe]
    if mode == EXACT_MODE:
        wn = estimation.weighted_norms(conf, Xs)
        values = a @ (conf.theta_hat @ Xs.T) \
            + conf.beta_sqrt * wn * np.abs(a).sum()
        k = int(np.argmax(values))
        x = Xs[k]
        if wn[k] < 1e-15:
            theta_tilde = conf.theta_hat.copy()
        else:
            direction = estimation.solve_gram(conf.gram, x) / wn[k]
            theta_tilde = conf.theta_hat + np.outer(
                np.sign(a), conf.beta_sqrt * direction)
        return OptimisticChoice(x=x, theta_tilde=theta_tilde,
                                value=float(values[k]))
    if mode == L1_MODE:
        verts = estimation.l1_vertices(conf, radius=l1_radius)  # (n, 2d, d)
        scores = verts @ Xs.T                                   # (n, 2d, N)
        signed = a[:, None, None] * scores
        values = signed.max(axis=1).sum(axis=0)
        k = int(np.argmax(values))
        rows = signed[:, :, k].argmax(axis=1)
        theta_tilde = verts[np.arange(verts.shape[0]), rows]
        return OptimisticChoice(x=Xs[k], theta_tilde=theta_tilde,
                                value=float(values[k]))
    raise ValueError(f"unknown selection mode {mode!r}")


def select_with_refinement(conf, safety, a, grid, mode=EXACT_MODE,
                           passes=2, shrink_factor=0.1, l1_radius=None):
    """Grid selection followed by local refinement passes around the incumbent."""
    choice = select_optimistic(conf, safety, a, grid, mode=mode,
                               l1_radius=l1_radius)
    current = grid
    for _ in range(passes):
        current = refine_candidates(current, choice.x, shrink_factor)
        try:
            refined = select_optimistic(conf, safety, a, current, mode=mode,
                                        l1_radius=l1_radius)
        except EmptySafeSetError:
            break  # incumbent stays; clipping can strand a refined window
        if refined.value > choice.value:
            choice = refined
    return choice
