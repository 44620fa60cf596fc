"""Polytope geometry: halfspace representations, inner approximations by
dual-norm offsets ("shrinking"), maximum shrinkage, sharpness, and the
condition constant that bounds how fast sharpness grows.

Everything here is a pure function of its arguments; all solves are done
with the in-package simplex (:mod:`safebandit.lp`) and Dykstra projections,
so the module has no solver dependencies. Tolerances follow the package
defaults below and every operation accepts overrides.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import (
    ConvergenceError,
    DegenerateGeometryError,
    EmptySetError,
    EnumerationBudgetError,
    GeometryDomainError,
    PolytopeParseError,
    UnboundedSetError,
)
from .linalg import jacobi_eigh

FEAS_TOL = 1e-8        # constraint slack accepted as "satisfied"
RANK_TOL = 1e-10       # smallest singular value treated as zero
DUP_TOL = 1e-7         # vertex deduplication radius
SUBSET_BUDGET = 2_000_000  # row-subset enumeration cap
MAX_ENUM_DIM = 12      # subset enumeration is for desk-scale dimensions
DYKSTRA_TOL = 1e-9
DYKSTRA_SWEEPS = 100_000


@dataclass(frozen=True)
class Norm:
    """One of the p-norms used for shrinkage balls, p in {1, 2, inf}.

    Carries the dual exponent (offsets use dual norms of the constraint
    normals) and the constant C = max_{||y||_p = 1} ||y||_2 that appears in
    the linear sharpness bound.
    """

    p: float

    def __post_init__(self):
        if self.p not in (1.0, 2.0, math.inf):
            raise ValueError("norm exponent must be 1, 2, or inf")

    @property
    def label(self):
        return "inf" if math.isinf(self.p) else str(int(self.p))

    @property
    def dual_p(self):
        if self.p == 1.0:
            return math.inf
        if self.p == 2.0:
            return 2.0
        return 1.0

    def dual_norms(self, rows):
        """Row-wise dual norm of a matrix of constraint normals."""
        rows = np.atleast_2d(rows)
        if self.p == 2.0:
            return np.linalg.norm(rows, axis=1)
        if math.isinf(self.p):
            return np.abs(rows).sum(axis=1)
        return np.abs(rows).max(axis=1)

    def euclidean_factor(self, m):
        """C = max_{||y||=1} ||y||_2; sqrt(m) for the inf-norm, else 1."""
        return math.sqrt(m) if math.isinf(self.p) else 1.0

    @staticmethod
    def from_label(label):
        table = {"1": 1.0, "2": 2.0, "inf": math.inf}
        if str(label) not in table:
            raise ValueError(f"unknown norm label {label!r}; use 1, 2 or inf")
        return Norm(table[str(label)])


L1 = Norm(1.0)
L2 = Norm(2.0)
LINF = Norm(math.inf)


@dataclass(frozen=True)
class Polytope:
    """The set {x in R^m : A x <= b} with p halfspace rows.

    Rows must be nonzero; redundancy is allowed and recomputed on demand
    by the operations that care. Boundedness is not checked at
    construction (see :func:`is_bounded`).
    """

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.ndim != 2 or b.shape[0] != A.shape[0]:
            raise ValueError("A must be (p, m) with b of length p")
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("polytope data must be finite")
        if A.shape[0] == 0:
            raise ValueError("polytope needs at least one halfspace")
        if np.any(np.linalg.norm(A, axis=1) <= 0.0):
            raise ValueError("every constraint row must be nonzero")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def n_rows(self):
        return self.A.shape[0]

    def contains(self, x, tol=FEAS_TOL):
        """Membership test; vectorized over the leading axes of `x`."""
        x = np.asarray(x, dtype=float)
        slack = x @ self.A.T - self.b
        return np.all(slack <= tol, axis=-1)


@dataclass(frozen=True)
class Vertex:
    """A polytope vertex with the m linearly independent rows active at it."""

    point: np.ndarray
    active_rows: tuple


def shrink(poly, delta, norm):
    """Inner approximation: offset every row by delta times its dual norm.

    The result is exactly the set of points whose delta-ball (in `norm`)
    stays inside `poly`; it may be empty, which is a legitimate output
    queried separately with :func:`is_empty`.
    """
    if delta < 0:
        raise ValueError("shrinkage must be nonnegative")
    return Polytope(poly.A, poly.b - delta * norm.dual_norms(poly.A))


def is_empty(poly, tol=1e-9):
    """True iff the polytope has no point, by a phase-1 feasibility solve."""
    return lp.feasible_point(poly.A, poly.b, tol=tol) is None


def is_bounded(poly, tol=1e-9):
    """True iff the set is bounded: every coordinate LP must be bounded."""
    for i in range(poly.dim):
        for sign in (1.0, -1.0):
            c = np.zeros(poly.dim)
            c[i] = sign
            if lp.maximize(c, poly.A, poly.b, tol=tol).status == lp.UNBOUNDED:
                return False
    return True


def max_shrinkage(poly, norm, tol=1e-9):
    """Largest delta for which the shrunk set stays nonempty.

    Solved as the LP  max delta  s.t.  A x + delta * alpha <= b, delta >= 0
    with alpha the dual norms of the rows. The shrunk set is nonempty for
    every delta in [0, H]; H > 0 iff the polytope has nonempty interior.
    """
    alpha = norm.dual_norms(poly.A)
    m = poly.dim
    G = np.zeros((poly.n_rows + 1, m + 1))
    G[:-1, :m] = poly.A
    G[:-1, m] = alpha
    G[-1, m] = -1.0
    h = np.concatenate([poly.b, [0.0]])
    c = np.zeros(m + 1)
    c[m] = 1.0
    res = lp.maximize(c, G, h, tol=tol)
    if res.status == lp.INFEASIBLE:
        raise EmptySetError("polytope is empty; maximum shrinkage undefined")
    if res.status == lp.UNBOUNDED:
        raise UnboundedSetError("shrinkage LP unbounded; polytope admits "
                                "arbitrarily large inscribed balls")
    return max(0.0, float(res.value))


def _row_subsets(poly, budget):
    p, m = poly.n_rows, poly.dim
    if m > MAX_ENUM_DIM:
        raise EnumerationBudgetError(
            f"dimension {m} exceeds the enumeration limit {MAX_ENUM_DIM}")
    count = math.comb(p, m)
    if count > budget:
        raise EnumerationBudgetError(
            f"{count} row subsets exceed the budget {budget}")
    return itertools.combinations(range(p), m)


def vertices(poly, feas_tol=FEAS_TOL, dup_tol=DUP_TOL, rank_tol=RANK_TOL,
             budget=SUBSET_BUDGET):
    """Enumerate the vertices of a bounded polytope.

    Every m-subset of rows with invertible normals is solved and kept when
    feasible; points closer than `dup_tol` are merged (keeping the first
    witnessing row set). Exponential in the row count, hence the budget.
    """
    if not is_bounded(poly):
        raise UnboundedSetError("vertex enumeration requires a bounded set")
    found = []
    for ell in _row_subsets(poly, budget):
        Asub = poly.A[list(ell)]
        svals = np.linalg.svd(Asub, compute_uv=False)
        if svals[-1] <= rank_tol:
            continue
        point = np.linalg.solve(Asub, poly.b[list(ell)])
        if poly.contains(point, tol=feas_tol):
            found.append(Vertex(point, tuple(ell)))
    if not found:
        raise EmptySetError("no feasible basic solution; polytope is empty "
                            "or degenerate")
    unique = []
    for v in found:
        if all(np.linalg.norm(v.point - u.point) > dup_tol for u in unique):
            unique.append(v)
    return unique


def project(point, poly, tol=DYKSTRA_TOL, max_sweeps=DYKSTRA_SWEEPS,
            feas_tol=FEAS_TOL):
    """Euclidean projection onto the polytope by Dykstra's algorithm.

    Cycles halfspace projections with Dykstra corrections until a full
    sweep moves the iterate less than `tol` and the iterate is feasible
    to within `feas_tol`. Exact in the limit for intersections of convex
    sets; raises :class:`ConvergenceError` with the last iterate when the
    sweep budget runs out (e.g. when the set is actually empty).
    """
    A, b = poly.A, poly.b
    p = poly.n_rows
    sqnorms = np.einsum("ij,ij->i", A, A)
    x = np.asarray(point, dtype=float).copy()
    corrections = np.zeros((p, poly.dim))
    for _ in range(max_sweeps):
        shift = 0.0
        for j in range(p):
            w = x + corrections[j]
            viol = A[j] @ w - b[j]
            if viol > 0.0:
                x_new = w - (viol / sqnorms[j]) * A[j]
            else:
                x_new = w
            corrections[j] = w - x_new
            shift = max(shift, float(np.max(np.abs(x_new - x))))
            x = x_new
        if shift < tol:
            residual = float(np.max(A @ x - b))
            if residual <= feas_tol:
                return x
    raise ConvergenceError("Dykstra projection did not converge",
                           last_iterate=x,
                           residual=float(np.max(A @ x - b)))


def sharpness(poly, delta, norm, feas_tol=FEAS_TOL, proj_tol=DYKSTRA_TOL,
              budget=SUBSET_BUDGET):
    """Worst-case distance from the set to its shrunk version.

    The projection distance to the (convex) shrunk set is convex in the
    outer point, so the supremum over the polytope is attained at a
    vertex; the value is therefore computed exactly as a maximum over the
    vertex list. Defined for delta in [0, max_shrinkage].
    """
    H = max_shrinkage(poly, norm)
    if delta < 0.0 or delta > H + 1e-9 * max(1.0, H):
        raise GeometryDomainError(
            f"shrinkage {delta} outside [0, {H}]; sharpness undefined")
    delta = min(delta, H)
    if delta == 0.0:
        return 0.0
    inner = shrink(poly, delta, norm)
    best = 0.0
    for v in vertices(poly, feas_tol=feas_tol, budget=budget):
        proj = project(v.point, inner, tol=proj_tol, feas_tol=feas_tol)
        best = max(best, float(np.linalg.norm(v.point - proj)))
    return best


def condition_constant(poly, rank_tol=RANK_TOL, budget=SUBSET_BUDGET):
    """Max condition number over all invertible m-subsets of constraint rows.

    Singular values come from the Jacobi eigendecomposition of
    (A^l)^T A^l. Squaring floors the relative accuracy of the smallest
    eigenvalue at machine-epsilon times the largest, so the dependence
    screen is relative: a subset is skipped when its smallest Gram
    eigenvalue is at most `rank_tol` times its largest (a condition-number
    cap of 1/sqrt(rank_tol)).
    """
    best = None
    for ell in _row_subsets(poly, budget):
        Asub = poly.A[list(ell)]
        evals, _ = jacobi_eigh(Asub.T @ Asub)
        if evals[-1] <= 0.0 or evals[0] <= rank_tol * evals[-1]:
            continue
        best = max(best or 0.0, math.sqrt(evals[-1] / evals[0]))
    if best is None:
        raise DegenerateGeometryError(
            "no linearly independent row subset; condition constant undefined")
    return best


def diameter(poly, **vertex_kwargs):
    """Largest pairwise Euclidean distance, taken over the vertex list."""
    pts = np.array([v.point for v in vertices(poly, **vertex_kwargs)])
    diffs = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diffs ** 2).sum(axis=-1)).max())


def sharpness_curve(poly, norm, n_points=50):
    """Sharpness sampled at n uniformly spaced shrinkages in [0, H].

    Returns an (n, 2) array of (delta, sharpness) rows, ready for CSV
    emission or plotting; the curve starts at (0, 0) and is nondecreasing.
    """
    if n_points < 2:
        raise ValueError("need at least two curve points")
    H = max_shrinkage(poly, norm)
    deltas = np.linspace(0.0, H, n_points)
    return np.array([[d, sharpness(poly, d, norm)] for d in deltas])


def dump_polytope(poly):
    """Serialize to the plain-text exchange format (full precision)."""
    lines = [f"{poly.n_rows} {poly.dim}"]
    for row, offset in zip(poly.A, poly.b):
        lines.append(" ".join(repr(float(v)) for v in row) + " " + repr(float(offset)))
    return "\n".join(lines) + "\n"


def parse_polytope(text):
    """Inverse of :func:`dump_polytope`; errors carry 1-based line numbers."""
    lines = text.splitlines()
    content = [(i + 1, ln.strip()) for i, ln in enumerate(lines) if ln.strip()]
    if not content:
        raise PolytopeParseError("empty polytope file")
    header_no, header = content[0]
    parts = header.split()
    if len(parts) != 2:
        raise PolytopeParseError("header must be 'p m'", line=header_no)
    try:
        p, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise PolytopeParseError("header must hold two integers", line=header_no)
    if len(content) - 1 != p:
        raise PolytopeParseError(
            f"expected {p} constraint lines, found {len(content) - 1}",
            line=header_no)
    A = np.zeros((p, m))
    b = np.zeros(p)
    for k, (line_no, ln) in enumerate(content[1:]):
        fields = ln.split()
        if len(fields) != m + 1:
            raise PolytopeParseError(
                f"expected {m + 1} numbers, found {len(fields)}", line=line_no)
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise PolytopeParseError("non-numeric field", line=line_no)
        A[k] = values[:m]
        b[k] = values[m]
    return Polytope(A, b)


def save_polytope(poly, path):
    with open(path, "w") as fh:
        fh.write(dump_polytope(poly))


def load_polytope(path):
    with open(path) as fh:
        return parse_polytope(fh.read())
