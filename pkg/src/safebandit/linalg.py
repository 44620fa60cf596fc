"""Small dense linear-algebra kernels: cyclic Jacobi eigensolver and
rank-one Cholesky updates.

Both are written for the matrix sizes this package actually meets
(dimensions of a few) where clarity beats asymptotics.
"""

import numpy as np


def jacobi_eigh(M, tol=1e-12, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    M : (d, d) array, symmetric.
    tol : off-diagonal Frobenius norm (relative to ||M||_F) at which to stop.
    max_sweeps : sweep budget; exceeded only for pathological input.

    Returns
    -------
    (w, Q) : eigenvalues in ascending order and the matching orthonormal
        eigenvector columns, M = Q diag(w) Q^T.
    """
    A = np.array(M, dtype=float)
    d = A.shape[0]
    if A.shape != (d, d):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, atol=1e-10 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix must be symmetric")
    A = 0.5 * (A + A.T)
    Q = np.eye(d)
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2) * 2.0)
        if off <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # classic symmetric Schur 2x2 rotation
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot_p = A[:, p].copy()
                rot_q = A[:, q].copy()
                A[:, p] = c * rot_p - s * rot_q
                A[:, q] = s * rot_p + c * rot_q
                rot_p = A[p, :].copy()
                rot_q = A[q, :].copy()
                A[p, :] = c * rot_p - s * rot_q
                A[q, :] = s * rot_p + c * rot_q
                qp = Q[:, p].copy()
                qq = Q[:, q].copy()
                Q[:, p] = c * qp - s * qq
                Q[:, q] = s * qp + c * qq
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], Q[:, order]


def min_eig_symmetric(M, tol=1e-12):
    """Smallest eigenvalue of a symmetric matrix via :func:`jacobi_eigh`."""
    w, _ = jacobi_eigh(M, tol=tol)
    return float(w[0])


def chol_rank1_update(L, x):
    """Return the Cholesky factor of L L^T + x x^T.

    Standard sequence of plane rotations; `L` is lower triangular and is not
    modified. Cost O(d^2).
    """
    L = np.array(L, dtype=float)
    v = np.array(x, dtype=float).copy()
    d = L.shape[0]
    for k in range(d):
        r = np.hypot(L[k, k], v[k])
        c = r / L[k, k]
        s = v[k] / L[k, k]
        L[k, k] = r
        if k + 1 < d:
            L[k + 1:, k] = (L[k + 1:, k] + s * v[k + 1:]) / c
            v[k + 1:] = c * v[k + 1:] - s * L[k + 1:, k]
    return L


def inv_sqrt_symmetric(M, tol=1e-12):
    """M^{-1/2} for symmetric positive definite M via the Jacobi spectrum."""
    w, Q = jacobi_eigh(M, tol=tol)
    if w[0] <= 0:
        raise ValueError("matrix is not positive definite")
    return (Q / np.sqrt(w)) @ Q.T
