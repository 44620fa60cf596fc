"""Online regularized least squares for a matrix-valued linear response.

Each response coordinate i gets its own ridge estimate sharing one Gram
matrix V_t = nu*I + sum_s x_s x_s^T. The state keeps V, its Cholesky
factor (maintained by rank-one updates), the cross moments, and the
confidence radius sqrt(beta_t); queries (weighted norms, membership,
outer-approximation vertices) never mutate it.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_triangular

from .linalg import chol_rank1_update, inv_sqrt_symmetric, min_eig_symmetric


@dataclass(frozen=True)
class ConfidenceParams:
    """Constants that shape the confidence radius.

    `L` enters the radius formula; `check_L` (default `L`) is the bound
    actually enforced on incoming actions, kept separate so configurations
    that take `L` from response-space magnitudes can still validate inputs
    against the true action-set bound.
    """

    R: float
    S: float
    L: float
    delta: float
    n: int
    d: int
    nu: float
    beta_scale: float = 1.0
    check_L: float | None = None

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("regularizer nu must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("confidence level delta must lie in (0, 1)")
        if self.R < 0 or self.S < 0 or self.L <= 0:
            raise ValueError("R, S must be nonnegative and L positive")
        if self.n < 1 or self.d < 1:
            raise ValueError("dimensions must be positive")

    @property
    def norm_check_bound(self):
        return self.L if self.check_L is None else self.check_L


def beta_sqrt_value(params, t):
    """Confidence radius sqrt(beta_t) = R*sqrt(d*log((1+t L^2/nu)/(delta/n))) + sqrt(nu)*S."""
    if t < 0:
        raise ValueError("round index must be nonnegative")
    log_arg = (1.0 + t * params.L ** 2 / params.nu) * params.n / params.delta
    return params.beta_scale * (
        params.R * math.sqrt(params.d * math.log(log_arg))
        + math.sqrt(params.nu) * params.S
    )


@dataclass(frozen=True)
class GramState:
    V: np.ndarray       # (d, d) symmetric positive definite
    chol: np.ndarray    # lower triangular, chol @ chol.T == V
    cross: np.ndarray   # (d, n) accumulated x y^T
    t: int
    nu: float


@dataclass(frozen=True)
class ConfidenceState:
    params: ConfidenceParams
    gram: GramState
    theta_hat: np.ndarray  # (n, d), row i estimates response coordinate i
    beta_sqrt: float

    @classmethod
    def fresh(cls, params):
        d, n = params.d, params.n
        gram = GramState(
            V=params.nu * np.eye(d),
            chol=math.sqrt(params.nu) * np.eye(d),
            cross=np.zeros((d, n)),
            t=0,
            nu=params.nu,
        )
        return cls(params=params, gram=gram, theta_hat=np.zeros((n, d)),
                   beta_sqrt=beta_sqrt_value(params, 0))


def solve_gram(gram, rhs):
    """V^{-1} rhs via the two triangular solves of the stored factor."""
    w = solve_triangular(gram.chol, rhs, lower=True)
    return solve_triangular(gram.chol.T, w, lower=False)


def update(state, x, y):
    """Absorb one observation (action x, response y) and return the new state."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    p = state.params
    if x.shape != (p.d,) or y.shape != (p.n,):
        raise ValueError("observation dimensions do not match the state")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("observations must be finite")
    norm = np.linalg.norm(x)
    if norm > p.norm_check_bound * (1.0 + 1e-9):
        raise ValueError(
            f"action norm {norm:.6g} exceeds the configured bound "
            f"{p.norm_check_bound:.6g}")
    gram = GramState(
        V=state.gram.V + np.outer(x, x),
        chol=chol_rank1_update(state.gram.chol, x),
        cross=state.gram.cross + np.outer(x, y),
        t=state.gram.t + 1,
        nu=state.gram.nu,
    )
    theta_hat = solve_gram(gram, gram.cross).T
    return replace(state, gram=gram, theta_hat=theta_hat,
                   beta_sqrt=beta_sqrt_value(p, gram.t))


def weighted_norm(state, x):
    """sqrt(x^T V^{-1} x), the norm controlling per-action uncertainty."""
    w = solve_triangular(state.gram.chol, np.asarray(x, dtype=float),
                         lower=True)
    return float(np.linalg.norm(w))


def weighted_norms(state, X):
    """Vectorized :func:`weighted_norm` over the rows of X."""
    W = solve_triangular(state.gram.chol, np.asarray(X, dtype=float).T,
                         lower=True)
    return np.linalg.norm(W, axis=0)


def contains(state, theta):
    """True iff every row of theta is inside its confidence ellipsoid."""
    dev = np.asarray(theta, dtype=float) - state.theta_hat
    row_norms = np.linalg.norm(dev @ state.gram.chol, axis=1)
    return bool(np.all(row_norms <= state.beta_sqrt))


def l1_vertices(state, radius=None):
    """Vertices of the per-row l1 outer approximation of the ellipsoids.

    For each row i the 2d points theta_hat^i +/- radius * (V^{-1/2} e_k);
    with the default radius sqrt(d * beta_t) the row's ellipsoid lies in
    the convex hull of its vertex list. Returns an (n, 2d, d) array,
    ordered +e_1..+e_d then -e_1..-e_d.
    """
    if radius is None:
        radius = math.sqrt(state.params.d) * state.beta_sqrt
    # V^{-1/2} is symmetric, so its rows are the columns V^{-1/2} e_k.
    directions = radius * inv_sqrt_symmetric(state.gram.V)
    offsets = np.vstack([directions, -directions])  # (2d, d)
    return state.theta_hat[:, None, :] + offsets[None, :, :]


def min_eigenvalue(state):
    """Smallest eigenvalue of V_t (cyclic Jacobi)."""
    return min_eig_symmetric(state.gram.V)
