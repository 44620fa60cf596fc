"""Dense two-phase simplex for small inequality-form linear programs.

Solves  maximize c^T z  subject to  G z <= h  with z free, which is the
only LP shape the geometry layer needs (feasibility probes, maximum
shrinkage, boundedness certificates). Bland's rule is used throughout so
degenerate bases cannot cycle. Problem sizes here are a handful of
variables and at most a few dozen rows, so a full dense tableau is the
simplest correct choice.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_DEFAULT_TOL = 1e-9
_DEFAULT_MAX_PIVOTS = 20000


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None = None
    value: float | None = None


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    piv_row = T[row]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * piv_row
    basis[row] = col


def _simplex_min(T, basis, c, tol, max_pivots):
    """Minimize c^T x on the tableau T=[A|b] from a basic feasible start.

    The basis columns are reduced to identity on entry. Returns a status;
    T and basis are updated in place. Bland's rule: entering = smallest
    index with negative reduced cost, leaving = smallest basic index among
    minimum-ratio rows.
    """
    n = T.shape[1] - 1
    for i in range(len(basis)):
        piv = T[i, basis[i]]
        if abs(piv) <= tol:
            raise ConvergenceError("simplex start basis is numerically singular")
        if piv != 1.0 or np.any(np.delete(T[:, basis[i]], i) != 0.0):
            _pivot(T, basis, i, basis[i])

    for _ in range(max_pivots):
        reduced = c - c[basis] @ T[:, :n] if len(basis) else c.copy()
        reduced[basis] = 0.0
        entering = -1
        for j in range(n):
            if reduced[j] < -tol:
                entering = j
                break
        if entering < 0:
            return OPTIMAL
        col = T[:, entering]
        rhs = T[:, n]
        best_row = -1
        best_ratio = np.inf
        for i in range(len(basis)):
            if col[i] > tol:
                ratio = rhs[i] / col[i]
                if ratio < best_ratio - tol or (
                    abs(ratio - best_ratio) <= tol
                    and (best_row < 0 or basis[i] < basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = i
        if best_row < 0:
            return UNBOUNDED
        _pivot(T, basis, best_row, entering)
    raise ConvergenceError("simplex exceeded its pivot budget",
                           residual=float(np.min(reduced)))


def maximize(c, G, h, tol=_DEFAULT_TOL, max_pivots=_DEFAULT_MAX_PIVOTS):
    """Maximize c^T z subject to G z <= h over free z.

    Returns an :class:`LPResult` whose status is one of ``optimal``,
    ``infeasible`` or ``unbounded``. Raises :class:`ConvergenceError` only
    when the pivot budget is exhausted, which is a numerical diagnostic
    rather than an answer.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    p, m = G.shape
    if h.shape != (p,) or c.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    if not (np.isfinite(G).all() and np.isfinite(h).all() and np.isfinite(c).all()):
        raise ValueError("LP data must be finite")

    # Row equilibration: scaling an inequality by a positive factor leaves
    # the feasible set unchanged and keeps pivots well conditioned.
    row_scale = np.linalg.norm(G, axis=1)
    row_scale[row_scale < 1e-300] = 1.0
    Gs = G / row_scale[:, None]
    hs = h / row_scale

    # Standard form: z = u - v with u, v >= 0 and one slack per row.
    A = np.hstack([Gs, -Gs, np.eye(p)])
    b = hs.copy()
    neg = b < 0.0
    A[neg] *= -1.0
    b[neg] *= -1.0
    n = A.shape[1]

    art_rows = np.flatnonzero(neg)
    basis = np.empty(p, dtype=int)
    for r in range(p):
        basis[r] = 2 * m + r
    if art_rows.size:
        art_cols = np.zeros((p, art_rows.size))
        for k, r in enumerate(art_rows):
            art_cols[r, k] = 1.0
            basis[r] = n + k
        T = np.hstack([A, art_cols, b[:, None]])
        c1 = np.zeros(n + art_rows.size)
        c1[n:] = 1.0
        status = _simplex_min(T, basis, c1, tol, max_pivots)
        if status != OPTIMAL:  # phase-1 objective is bounded below by zero
            raise ConvergenceError("phase-1 simplex reported unbounded")
        infeas = c1[basis] @ T[:, -1]
        if infeas > tol * max(1.0, float(np.abs(b).max())):
            return LPResult(INFEASIBLE)
        # Remove artificials: pivot basic ones onto structural columns, or
        # drop their rows as redundant when no pivot exists.
        keep = np.ones(p, dtype=bool)
        for i in range(p):
            if basis[i] >= n:
                j = -1
                for cand in range(n):
                    if abs(T[i, cand]) > np.sqrt(tol):
                        j = cand
                        break
                if j >= 0:
                    _pivot(T, basis, i, j)
                else:
                    keep[i] = False
        T = np.hstack([T[keep][:, :n], T[keep][:, -1:]])
        basis = basis[keep]
    else:
        T = np.hstack([A, b[:, None]])

    c2 = np.concatenate([-c, c, np.zeros(p)])
    status = _simplex_min(T, basis, c2, tol, max_pivots)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x_std = np.zeros(n)
    x_std[basis] = T[:, -1]
    z = x_std[:m] - x_std[m:2 * m]
    return LPResult(OPTIMAL, z, float(c @ z))


def feasible_point(G, h, tol=_DEFAULT_TOL):
    """A point with G z <= h, or None when the system is infeasible."""
    res = maximize(np.zeros(np.atleast_2d(G).shape[1]), G, h, tol=tol)
    return res.x if res.status == OPTIMAL else None
