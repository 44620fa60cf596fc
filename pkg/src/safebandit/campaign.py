"""Experiment campaigns: configuration, the multi-set multi-trial runner,
CSV emission, and geometry reports.

A campaign runs every configured safety set for the configured number of
trials, writes one CSV per trial plus per-set geometry reports and
sharpness curves, and aggregates exploitation-phase regret into a single
summary table. All outputs are deterministic functions of the
configuration, including the seeds.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry, policy, simulator
from .errors import ConfigError
from .geometry import L1, L2, LINF, Polytope
from .safesets import ActionBox

_REPORT_NORMS = (L1, L2, LINF)


def build_eb_safety(b):
    """Weighted cross-polytope constraint {y : ||diag(b) y||_1 <= 1}.

    Emitted as its full 2^n-halfspace description (one row per sign
    pattern), which is clean and redundancy-free for strictly positive b.
    """
    b = np.asarray(b, dtype=float).ravel()
    if b.size == 0 or np.any(b <= 0.0):
        raise ConfigError("the l1-ball weight vector must be strictly positive")
    n = b.size
    signs = np.array(np.meshgrid(*([[1.0, -1.0]] * n), indexing="ij"))
    signs = signs.reshape(n, -1).T          # (2^n, n), lexicographic
    return Polytope(signs * b[None, :], np.ones(signs.shape[0]))


@dataclass(frozen=True)
class CampaignConfig:
    """Flat campaign description; round-trips through the text format."""

    d: int = 3
    n: int = 3
    T: int = 1000
    nu: float = 0.1
    delta: float = 0.01
    sigma: float = 1e-3
    seed: int = 20240
    trials: int = 6
    theta_mode: str = "shared"            # shared | per-trial
    schedule: str = "override:100"        # theory | override:N
    mode: str = "l1"                      # exact | l1
    grid_per_axis: int = 21
    refine_passes: int = 2
    refine_factor: float = 0.1
    baseline_per_axis: int = 41
    baseline_refine_passes: int = 3
    box_margin: float = 1.05
    box_half: tuple = ()                  # explicit half-widths; empty = auto
    curve_points: int = 50
    beta_scale: float = 1.0
    reward_dir: tuple = (1.0, 0.0, 0.0)
    sets: tuple = (("b1", (0.1, 0.1, 0.1)),
                   ("b2", (0.05, 0.1, 0.1)),
                   ("b3", (0.1 / 3.0, 0.1, 0.1)))
    out: str = "results"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trial count must be at least 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.theta_mode not in ("shared", "per-trial"):
            raise ConfigError("theta_mode must be 'shared' or 'per-trial'")
        if self.mode not in (policy.EXACT_MODE, policy.L1_MODE):
            raise ConfigError("mode must be 'exact' or 'l1'")
        parse_schedule_spec(self.schedule)
        if len(self.reward_dir) != self.n:
            raise ConfigError("reward direction must have length n")
        if not self.sets:
            raise ConfigError("at least one safety set is required")

    def policy_config(self):
        return simulator.PolicyConfig(
            mode=self.mode, per_axis=self.grid_per_axis,
            refine_passes=self.refine_passes,
            refine_factor=self.refine_factor,
            baseline_per_axis=self.baseline_per_axis,
            baseline_refine_passes=self.baseline_refine_passes)


def smoke_config(out="smoke-results", seed=20240):
    """Tiny noiseless configuration that exercises the whole pipeline."""
    return CampaignConfig(T=10, sigma=0.0, trials=1, schedule="override:5",
                          grid_per_axis=7, refine_passes=1,
                          baseline_per_axis=9, baseline_refine_passes=1,
                          curve_points=5, seed=seed, out=out)


def parse_schedule_spec(spec):
    """'theory' or 'override:N' -> (mode, override)."""
    if spec == "theory":
        return "theory", None
    if spec.startswith("override:"):
        try:
            n = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad schedule override in {spec!r}")
        return "override", n
    raise ConfigError(f"schedule must be 'theory' or 'override:N', got {spec!r}")


_FLOAT_FIELDS = {"nu", "delta", "sigma", "refine_factor", "box_margin",
                 "beta_scale"}
_INT_FIELDS = {"d", "n", "T", "seed", "trials", "grid_per_axis",
               "refine_passes", "baseline_per_axis",
               "baseline_refine_passes", "curve_points"}
_STR_FIELDS = {"theta_mode", "schedule", "mode", "out"}
_TUPLE_FIELDS = {"reward_dir", "box_half"}


def render_config(config):
    """Serialize to the flat key = value text format."""
    lines = []
    ordered = ["d", "n", "T", "nu", "delta", "sigma", "seed", "trials",
               "theta_mode", "schedule", "mode", "grid_per_axis",
               "refine_passes", "refine_factor", "baseline_per_axis",
               "baseline_refine_passes", "box_margin", "box_half",
               "curve_points", "beta_scale", "reward_dir", "out"]
    for name in ordered:
        value = getattr(config, name)
        if name in _TUPLE_FIELDS:
            rendered = ",".join(repr(float(v)) for v in value)
        elif name in _FLOAT_FIELDS:
            rendered = repr(float(value))
        else:
            rendered = str(value)
        lines.append(f"{name} = {rendered}")
    lines.append("sets = " + ",".join(name for name, _ in config.sets))
    for name, spec in config.sets:
        if isinstance(spec, str):
            lines.append(f"set.{name} = @{spec}")
        else:
            lines.append(f"set.{name} = " + ",".join(repr(float(v)) for v in spec))
    return "\n".join(lines) + "\n"


def parse_config(text):
    """Parse the flat key = value format back into a config."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    kwargs = {}
    for key, value in raw.items():
        if key in _INT_FIELDS:
            kwargs[key] = int(value)
        elif key in _FLOAT_FIELDS:
            kwargs[key] = float(value)
        elif key in _STR_FIELDS:
            kwargs[key] = value
        elif key in _TUPLE_FIELDS:
            kwargs[key] = tuple(float(v) for v in value.split(",")) \
                if value else ()
        elif key == "sets" or key.startswith("set."):
            continue
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    if "sets" in raw:
        names = [s.strip() for s in raw["sets"].split(",") if s.strip()]
        sets = []
        for name in names:
            spec_key = f"set.{name}"
            if spec_key not in raw:
                raise ConfigError(f"missing definition for safety set {name!r}")
            spec = raw[spec_key]
            if spec.startswith("@"):
                sets.append((name, spec[1:]))
            else:
                sets.append((name, tuple(float(v) for v in spec.split(","))))
        kwargs["sets"] = tuple(sets)
    return CampaignConfig(**kwargs)


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_config(text)


def resolve_safety_set(spec, expected_dim):
    """A set spec is either a positive weight vector or a polytope file path."""
    if isinstance(spec, str):
        poly = geometry.load_polytope(spec)
    else:
        poly = build_eb_safety(spec)
    if poly.dim != expected_dim:
        raise ConfigError(
            f"safety set dimension {poly.dim} does not match n={expected_dim}")
    return poly


def geometry_report(poly, norms=_REPORT_NORMS):
    """Geometry constants of a safety set, as a report dict.

    Includes the condition constant, the diameter, and the maximum
    shrinkage under each requested norm.
    """
    report = {
        "rows": poly.n_rows,
        "dim": poly.dim,
        "condition_constant": geometry.condition_constant(poly),
        "diameter": geometry.diameter(poly),
    }
    for norm in norms:
        report[f"max_shrinkage_{norm.label}"] = geometry.max_shrinkage(poly, norm)
    return report


def render_report(report):
    lines = []
    for key, value in report.items():
        rendered = repr(float(value)) if isinstance(value, float) else str(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def write_curve_csv(curve, path):
    lines = ["delta,sharpness"]
    lines += [f"{repr(float(d))},{repr(float(s))}" for d, s in curve]
    Path(path).write_text("\n".join(lines) + "\n")


def _draw_theta(rng, n, d):
    """U[-1,1] entries, redrawn until comfortably full rank."""
    for _ in range(1000):
        theta = rng.uniform(-1.0, 1.0, size=(n, d))
        if np.linalg.svd(theta, compute_uv=False)[-1] > geometry.RANK_TOL:
            return theta
    raise ConfigError("could not draw a full-rank parameter")


def _auto_box(theta_star, safety_sets, margin, d):
    """Symmetric box covering the true feasible set of every safety set.

    Requires a square ground truth (n == d) so the feasible set is the
    linear preimage of the response polytope; its vertex images bound the
    needed half-widths.
    """
    n = theta_star.shape[0]
    if n != d:
        raise ConfigError("automatic action box needs n == d; set box_half")
    inv = np.linalg.inv(theta_star)
    half = np.zeros(d)
    for poly in safety_sets:
        pts = np.array([v.point for v in geometry.vertices(poly)])
        images = pts @ inv.T
        half = np.maximum(half, np.abs(images).max(axis=0))
    half *= margin
    return ActionBox(-half, half)


def reference_setup(config, set_name):
    """Rebuild one campaign cell outside the runner, for replication studies.

    Returns (instance, schedule) for trial index 0 of the named set in
    shared-truth mode; replications differ only in the instance seed.
    """
    if config.theta_mode != "shared":
        raise ConfigError("reference setup is defined for shared-truth mode")
    polys = [(name, resolve_safety_set(spec, config.n))
             for name, spec in config.sets]
    by_name = dict(polys)
    if set_name not in by_name:
        raise ConfigError(f"unknown safety set {set_name!r}")
    poly = by_name[set_name]
    theta = _draw_theta(np.random.default_rng(config.seed), config.n, config.d)
    biggest = 0.0
    for _, p in polys:
        pts = np.array([v.point for v in geometry.vertices(p)])
        biggest = max(biggest, float(np.linalg.norm(pts, axis=1).max()))
    L = biggest + 0.1
    S = float(np.linalg.norm(theta, 2)) + 0.1
    if config.box_half:
        half = np.asarray(config.box_half, dtype=float)
        box = ActionBox(-half, half)
    else:
        box = _auto_box(theta, [p for _, p in polys], config.box_margin,
                        config.d)
    instance = simulator.ProblemInstance(
        theta_star=theta, reward_dir=np.asarray(config.reward_dir),
        safety=poly, action_box=box, R=config.sigma, S=S, L=L,
        delta=config.delta, nu=config.nu, T=config.T, seed=config.seed,
        beta_scale=config.beta_scale)
    sampler = policy.fit_exploration_sampler(poly, S, box)
    mode, override = parse_schedule_spec(config.schedule)
    sched = policy.schedule(config.T, instance.confidence_params(),
                            H_inf=geometry.max_shrinkage(poly, LINF),
                            lambda_minus=sampler.lambda_minus,
                            mode=mode, override=override)
    return instance, sched


@dataclass
class SetResult:
    """Aggregates of one safety set across its trials."""

    name: str
    report: dict
    n_trials: int
    violations: int
    mean_cum_regret: np.ndarray     # exploitation phase, per round index
    ci95: np.ndarray
    bound: simulator.RegretBound
    schedule: policy.Schedule
    logs: list = field(repr=False, default_factory=list)

    @property
    def final_mean_regret(self):
        return float(self.mean_cum_regret[-1])


@dataclass
class CampaignSummary:
    sets: list
    out_dir: Path
    summary_path: Path


def _summary_rows(result):
    rep = result.report
    bound = result.bound
    constants = [
        repr(float(result.violations)), repr(float(rep["condition_constant"])),
        repr(float(rep["max_shrinkage_1"])), repr(float(rep["max_shrinkage_2"])),
        repr(float(rep["max_shrinkage_inf"])),
        repr(float(bound.exploration_term)), repr(float(bound.sharpness_term)),
        repr(float(bound.bandit_term)), repr(float(bound.total)),
        str(int(bound.applicable)),
    ]
    rows = []
    for k, (mean, ci) in enumerate(zip(result.mean_cum_regret, result.ci95)):
        rows.append(",".join(
            [result.name, str(k + 1), repr(float(mean)), repr(float(ci)),
             str(result.n_trials)] + constants))
    return rows


SUMMARY_HEADER = ("set,exploit_round,mean_cum_regret,ci95,n_trials,"
                  "violations,K,H1,H2,Hinf,bound_exploration,"
                  "bound_sharpness,bound_bandit,bound_total,bound_applicable")


def run_campaign(config, out_dir=None, progress=None):
    """Run every (set, trial) cell of the campaign and write all outputs.

    Per-trial seeds are base seed + trial index. In `shared` mode the
    ground truth is drawn once from the base seed and reused everywhere,
    so trials differ only in their noise and exploration draws; in
    `per-trial` mode it is redrawn from each trial seed.
    """
    out = Path(out_dir if out_dir is not None else config.out)
    out.mkdir(parents=True, exist_ok=True)
    note = progress or (lambda msg: None)

    polys = [(name, resolve_safety_set(spec, config.n))
             for name, spec in config.sets]
    sched_mode, sched_override = parse_schedule_spec(config.schedule)

    shared_theta = None
    if config.theta_mode == "shared":
        shared_theta = _draw_theta(np.random.default_rng(config.seed),
                                   config.n, config.d)

    # L convention of the reference configuration: the largest response
    # norm over all configured safety sets, plus 0.1.
    biggest_response = 0.0
    for _, poly in polys:
        pts = np.array([v.point for v in geometry.vertices(poly)])
        biggest_response = max(biggest_response,
                               float(np.linalg.norm(pts, axis=1).max()))
    L = biggest_response + 0.1

    box_cache = {}

    def box_for(theta):
        if config.box_half:
            half = np.asarray(config.box_half, dtype=float)
            return ActionBox(-half, half)
        key = theta.tobytes()
        if key not in box_cache:
            box_cache[key] = _auto_box(theta, [p for _, p in polys],
                                       config.box_margin, config.d)
        return box_cache[key]

    results = []
    for name, poly in polys:
        report = geometry_report(poly)
        (out / f"geometry_{name}.txt").write_text(render_report(report))
        curves = {}
        for norm in _REPORT_NORMS:
            curve = geometry.sharpness_curve(poly, norm, config.curve_points)
            curves[norm.label] = curve
            write_curve_csv(curve, out / f"sharpness_{name}_{norm.label}.csv")
        note(f"[{name}] geometry written (K={report['condition_constant']:.4g})")

        logs = []
        schedule_used = None
        bound = None
        for k in range(config.trials):
            trial_seed = config.seed + k
            if shared_theta is not None:
                theta = shared_theta
            else:
                theta = _draw_theta(np.random.default_rng(trial_seed),
                                    config.n, config.d)
            S = float(np.linalg.norm(theta, 2)) + 0.1
            box = box_for(theta)
            instance = simulator.ProblemInstance(
                theta_star=theta, reward_dir=np.asarray(config.reward_dir),
                safety=poly, action_box=box, R=config.sigma, S=S, L=L,
                delta=config.delta, nu=config.nu, T=config.T,
                seed=trial_seed, beta_scale=config.beta_scale)
            try:
                sampler = policy.fit_exploration_sampler(poly, S, box)
                sched = policy.schedule(
                    config.T, instance.confidence_params(),
                    H_inf=report["max_shrinkage_inf"],
                    lambda_minus=sampler.lambda_minus,
                    mode=sched_mode, override=sched_override)
                log = simulator.run_trial(instance, sched,
                                          config.policy_config())
            except Exception as exc:
                raise ConfigError(
                    f"campaign aborted: trial {k} of set {name!r} "
                    f"(seed {trial_seed}) failed: {exc}") from exc
            log.to_csv(out / f"trial_{name}_{k}.csv")
            logs.append(log)
            if schedule_used is None:
                schedule_used = sched
                bound = simulator.theoretical_bound(instance, sched,
                                                    curves["inf"])
            note(f"[{name}] trial {k}: R_T={log.cum_regret[-1]:.4g} "
                 f"violations={log.violations()}")

        exploit = np.array([log.exploit_cum_regret() for log in logs])
        mean = exploit.mean(axis=0)
        if len(logs) >= 2:
            ci = 1.96 * exploit.std(axis=0, ddof=1) / math.sqrt(len(logs))
        else:
            ci = np.full(exploit.shape[1], math.nan)
        results.append(SetResult(
            name=name, report=report, n_trials=len(logs),
            violations=int(sum(log.violations() for log in logs)),
            mean_cum_regret=mean, ci95=ci, bound=bound,
            schedule=schedule_used, logs=logs))

    summary_path = out / "summary.csv"
    lines = [SUMMARY_HEADER]
    for result in results:
        lines.extend(_summary_rows(result))
    summary_path.write_text("\n".join(lines) + "\n")
    return CampaignSummary(sets=results, out_dir=out, summary_path=summary_path)
