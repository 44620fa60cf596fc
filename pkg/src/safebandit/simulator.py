"""Environment, round loop, regret accounting, and the numeric regret bound.

A trial runs the two-phase algorithm against a ground-truth linear
environment with Gaussian per-coordinate noise: pure exploration for the
scheduled T' rounds, then optimistic selection over the conservative safe
set, with the estimator updated every round. The log records everything
the acceptance diagnostics need, and its CSV projection follows the
documented column set exactly.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import estimation, geometry, policy, safesets
from .errors import ConfigError, EmptySafeSetError

_BASELINE_SLACK = 1e-9  # tolerance on nonnegativity of instantaneous regret


@dataclass(frozen=True)
class PolicyConfig:
    """Knobs of the optimistic selector and of the regret baseline."""

    mode: str = policy.EXACT_MODE
    per_axis: int = 21
    refine_passes: int = 2
    refine_factor: float = 0.1
    baseline_per_axis: int = 41
    baseline_refine_passes: int = 3
    l1_radius: float | None = None


@dataclass(frozen=True)
class ProblemInstance:
    """Ground truth and the constants the agent is told about it."""

    theta_star: np.ndarray        # (n, d), full rank, row norms <= S
    reward_dir: np.ndarray        # linear reward f(y) = a . y
    safety: geometry.Polytope     # response constraint {y : F y <= g}
    action_box: safesets.ActionBox
    R: float                      # noise scale; implemented as Gaussian std
    S: float
    L: float
    delta: float
    nu: float
    T: int
    seed: int
    beta_scale: float = 1.0

    def __post_init__(self):
        theta = np.atleast_2d(np.asarray(self.theta_star, dtype=float))
        a = np.asarray(self.reward_dir, dtype=float).ravel()
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "reward_dir", a)
        n, d = theta.shape
        if n > d:
            raise ConfigError("response dimension may not exceed action dimension")
        if a.shape != (n,) or not np.any(a):
            raise ConfigError("reward direction must be a nonzero n-vector")
        if self.safety.dim != n or self.action_box.dim != d:
            raise ConfigError("safety set or action box dimension mismatch")
        svals = np.linalg.svd(theta, compute_uv=False)
        if svals[-1] <= geometry.RANK_TOL:
            raise ConfigError("ground-truth parameter must be full rank")
        row_norms = np.linalg.norm(theta, axis=1)
        if np.any(row_norms > self.S * (1 + 1e-12)):
            raise ConfigError("a parameter row violates the norm bound S")
        if self.R < 0 or self.T < 1:
            raise ConfigError("noise scale must be nonnegative and T >= 1")

    @property
    def n(self):
        return self.theta_star.shape[0]

    @property
    def d(self):
        return self.theta_star.shape[1]

    @property
    def lipschitz(self):
        return float(np.linalg.norm(self.reward_dir))

    def confidence_params(self):
        # The radius formula uses the configured L; input checking uses the
        # larger of L and the box radius so grid candidates always pass.
        return estimation.ConfidenceParams(
            R=self.R, S=self.S, L=self.L, delta=self.delta,
            n=self.n, d=self.d, nu=self.nu, beta_scale=self.beta_scale,
            check_L=max(self.L, self.action_box.corner_norm),
        )


@dataclass
class TrialLog:
    """Per-round record of one trial plus its baseline and schedule.

    CSV projection (one row per round, header fixed):
    t, phase, x0..x{d-1}, y0..y{n-1}, reward, regret, cum_regret, safe,
    beta, lambda_min, margin. Booleans are written as 0/1 and floats with
    full round-trip precision.
    """

    x: np.ndarray
    y: np.ndarray
    phase: list
    reward: np.ndarray
    regret: np.ndarray
    cum_regret: np.ndarray
    safe: np.ndarray
    beta: np.ndarray
    lambda_min: np.ndarray
    margin: np.ndarray
    wnorm_prev: np.ndarray
    contains_star: np.ndarray
    fallback: np.ndarray
    x_star: np.ndarray
    opt_value: float
    schedule: policy.Schedule
    seed: int
    final_state: estimation.ConfidenceState = field(repr=False, default=None)

    @property
    def T(self):
        return len(self.reward)

    def exploit_regret(self):
        """Instantaneous regret of the exploitation phase only."""
        return self.regret[self.schedule.T_prime:]

    def exploit_cum_regret(self):
        return np.cumsum(self.exploit_regret())

    def violations(self):
        return int(np.sum(~self.safe))

    def to_csv(self, path):
        d, n = self.x.shape[1], self.y.shape[1]
        header = ["t", "phase"] + [f"x{i}" for i in range(d)] \
            + [f"y{i}" for i in range(n)] \
            + ["reward", "regret", "cum_regret", "safe", "beta",
               "lambda_min", "margin"]
        lines = [",".join(header)]
        for t in range(self.T):
            fields = [str(t + 1), self.phase[t]]
            fields += [repr(float(v)) for v in self.x[t]]
            fields += [repr(float(v)) for v in self.y[t]]
            fields += [repr(float(self.reward[t])),
                       repr(float(self.regret[t])),
                       repr(float(self.cum_regret[t])),
                       str(int(self.safe[t])),
                       repr(float(self.beta[t])),
                       repr(float(self.lambda_min[t])),
                       repr(float(self.margin[t]))]
            lines.append(",".join(fields))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def optimal_action(instance, per_axis=None, refine_passes=None,
                   refine_factor=0.1):
    """Baseline: maximize the true expected reward over the true feasible set.

    Runs on its own (finer) grid plus refinements so that policy-grid
    coarseness cannot manufacture negative regret.
    """
    per_axis = per_axis or 41
    refine_passes = 3 if refine_passes is None else refine_passes
    theta, a = instance.theta_star, instance.reward_dir
    box, safety = instance.action_box, instance.safety

    def best_on(points):
        responses = points @ theta.T
        feasible = safety.contains(responses)
        if not feasible.any():
            return None
        rewards = responses[feasible] @ a
        k = int(np.argmax(rewards))
        return points[feasible][k], float(rewards[k])

    grid = policy.CandidateGrid.uniform(box, per_axis)
    incumbent = best_on(grid.points)
    if incumbent is None:
        raise ConfigError("true feasible set contains no baseline grid point")
    for _ in range(refine_passes):
        grid = policy.refine_candidates(grid, incumbent[0], refine_factor)
        candidate = best_on(grid.points)
        if candidate is not None and candidate[1] > incumbent[1]:
            incumbent = candidate
    return incumbent


def step_environment(instance, x, rng):
    """Noisy response y = Theta* x + eps, eps ~ N(0, R^2) per coordinate."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise ValueError("action must be finite")
    mean = instance.theta_star @ x
    return mean + instance.R * rng.standard_normal(instance.n)


def run_trial(instance, schedule, policy_config=None, rng=None):
    """Run the two-phase algorithm for T rounds and return the full log.

    Exploration rounds sample the safe sphere; exploitation rounds pick the
    optimistic pair over the conservative safe set built from all previous
    rounds. The estimator absorbs every round. If the candidate grid holds
    no safe point (possible early with a coarse grid) the round falls back
    to the exploration sampler, which preserves safety.
    """
    cfg = policy_config or PolicyConfig()
    rng = np.random.default_rng(instance.seed) if rng is None else rng
    theta, a = instance.theta_star, instance.reward_dir
    safety, box = instance.safety, instance.action_box
    T, T_prime = schedule.T, schedule.T_prime
    if T != instance.T:
        raise ConfigError("schedule horizon differs from the instance horizon")

    params = instance.confidence_params()
    conf = estimation.ConfidenceState.fresh(params)
    sampler = policy.fit_exploration_sampler(safety, instance.S, box)
    safesets.find_g0_witness(safety, instance.S, box)
    x_star, opt_value = optimal_action(
        instance, per_axis=cfg.baseline_per_axis,
        refine_passes=cfg.baseline_refine_passes,
        refine_factor=cfg.refine_factor)
    base_grid = policy.CandidateGrid.uniform(box, cfg.per_axis)

    d, n = instance.d, instance.n
    log = TrialLog(
        x=np.zeros((T, d)), y=np.zeros((T, n)), phase=[None] * T,
        reward=np.zeros(T), regret=np.zeros(T), cum_regret=np.zeros(T),
        safe=np.zeros(T, dtype=bool), beta=np.zeros(T),
        lambda_min=np.zeros(T), margin=np.zeros(T), wnorm_prev=np.zeros(T),
        contains_star=np.zeros(T, dtype=bool),
        fallback=np.zeros(T, dtype=bool),
        x_star=x_star, opt_value=opt_value, schedule=schedule,
        seed=instance.seed,
    )

    contains_prev = estimation.contains(conf, theta)
    running = 0.0
    for t in range(T):
        exploring = t < T_prime
        fallback = False
        if exploring:
            x = sampler.sample(rng)
        else:
            try:
                choice = policy.select_with_refinement(
                    conf, safety, a, base_grid, mode=cfg.mode,
                    passes=cfg.refine_passes,
                    shrink_factor=cfg.refine_factor,
                    l1_radius=cfg.l1_radius)
                x = choice.x
            except EmptySafeSetError:
                x = sampler.sample(rng)
                fallback = True

        margin = safesets.safety_margin(x, conf, safety)
        if not exploring and not fallback:
            assert margin >= 0.0, "optimistic selection left the safe set"
        wn_prev = estimation.weighted_norm(conf, x)
        y = step_environment(instance, x, rng)
        expected = theta @ x
        reward = float(a @ expected)
        response_safe = bool(safety.contains(expected))
        if margin >= 0.0 and contains_prev:
            assert response_safe, (
                "conservative membership plus confidence coverage must imply "
                "a safe response")
        regret = opt_value - reward
        assert regret >= -_BASELINE_SLACK, (
            f"negative instantaneous regret {regret}; baseline grid too coarse")
        regret = max(regret, 0.0)

        conf = estimation.update(conf, x, y)
        contains_prev = estimation.contains(conf, theta)
        running += regret

        log.x[t] = x
        log.y[t] = y
        log.phase[t] = "explore" if exploring else "exploit"
        log.reward[t] = reward
        log.regret[t] = regret
        log.cum_regret[t] = running
        log.safe[t] = response_safe
        log.beta[t] = conf.beta_sqrt
        log.lambda_min[t] = estimation.min_eigenvalue(conf)
        log.margin[t] = margin
        log.wnorm_prev[t] = wn_prev
        log.contains_star[t] = contains_prev
        log.fallback[t] = fallback

    _assert_elliptical_potential(log, params)
    log.final_state = conf
    return log


def elliptical_potential_bound(params, T, trajectory_norm_cap=None):
    """Deterministic cap on sum_t min(||x_t||^2_{V_{t-1}^{-1}}, 1).

    Uses the configured L, or the largest action norm actually played when
    that exceeds L, so the premise of the inequality always holds.
    """
    L = params.L if trajectory_norm_cap is None else max(params.L,
                                                         trajectory_norm_cap)
    d, nu = params.d, params.nu
    return 2.0 * (d * math.log((d * nu + T * L ** 2) / d) - d * math.log(nu))


def _assert_elliptical_potential(log, params):
    cap = float(np.linalg.norm(log.x, axis=1).max())
    lhs = float(np.minimum(log.wnorm_prev ** 2, 1.0).sum())
    rhs = elliptical_potential_bound(params, log.T, trajectory_norm_cap=cap)
    assert lhs <= rhs + 1e-9, (
        f"elliptical potential {lhs} exceeded its deterministic cap {rhs}")


@dataclass(frozen=True)
class RegretBound:
    """Numeric evaluation of the three-term theoretical regret bound."""

    exploration_term: float
    sharpness_term: float
    bandit_term: float
    ell: float                 # shrinkage argument fed to the sharpness curve
    applicable: bool           # False when ell exceeds the curve's domain

    @property
    def total(self):
        if not self.applicable:
            return math.nan
        return self.exploration_term + self.sharpness_term + self.bandit_term


def theoretical_bound(instance, schedule, sharpness_curve):
    """Evaluate the regret bound terms for a trial configuration.

    `sharpness_curve` is an (n, 2) array of (shrinkage, sharpness) samples
    of the feasible-response set under the sup-norm; the middle term
    interpolates it at ell = 2 sqrt(2 beta_T) L / sqrt(2 nu + lambda_- T').
    When ell lands outside the curve's domain (T' below the schedule floor
    t_h) the bound is flagged not applicable instead of extrapolated.
    """
    params = instance.confidence_params()
    M = instance.lipschitz
    n, d = instance.n, instance.d
    T, T_prime = schedule.T, schedule.T_prime
    beta_T = estimation.beta_sqrt_value(params, T) ** 2
    L = params.L
    ell = 2.0 * math.sqrt(2.0 * beta_T) * L / math.sqrt(
        2.0 * params.nu + schedule.lambda_minus * T_prime)
    curve = np.asarray(sharpness_curve, dtype=float)
    domain_max = float(curve[-1, 0])
    applicable = ell <= min(schedule.H_inf, domain_max) * (1 + 1e-9)
    sharp_at_ell = float(np.interp(ell, curve[:, 0], curve[:, 1])) \
        if applicable else math.nan
    exploration_term = 2.0 * M * math.sqrt(n) * L * instance.S * T_prime
    sharpness_term = M * (T - T_prime) * sharp_at_ell if applicable else math.nan
    bandit_term = M * max(schedule.H_inf, 1.0) * math.sqrt(
        n * 8.0 * beta_T * (T - T_prime) * d
        * math.log((1.0 + T * L ** 2) / (d * params.nu)))
    return RegretBound(exploration_term=exploration_term,
                       sharpness_term=sharpness_term,
                       bandit_term=bandit_term, ell=ell,
                       applicable=bool(applicable))
