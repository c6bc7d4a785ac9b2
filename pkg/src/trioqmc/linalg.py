"""Dense symmetric factorizations: jittered Cholesky, SPD solves, Jacobi eigen."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "NotPositiveDefiniteError",
    "SingularFactorError",
    "EigenConvergenceError",
    "JITTER_LADDER",
    "as_symmetric",
    "cholesky",
    "spd_solve",
    "logdet",
    "sym_eigen",
]

# multiples of trace(A)/n tried in order after a plain factorization fails
JITTER_LADDER = (1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


class SingularFactorError(np.linalg.LinAlgError):
    pass


class EigenConvergenceError(np.linalg.LinAlgError):
    pass


def as_symmetric(A, tol: float = 1e-12) -> np.ndarray:
    """Validate (near) symmetry and return the exactly symmetrized matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if np.array_equal(A, A.T):
        return A
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (A + A.T)


def cholesky(A, jitter: bool = True):
    """Lower Cholesky factor of ``A + eps I``.

    ``eps`` is 0 when ``A`` factorizes as given; otherwise it climbs
    :data:`JITTER_LADDER` times ``trace(A)/n`` until the factorization
    succeeds.

    Returns
    -------
    L : ndarray
    eps : float
        The jitter actually added.

    Raises
    ------
    NotPositiveDefiniteError
        If the largest jitter still fails (or ``jitter`` is False and the
        plain factorization fails).
    """
    A = as_symmetric(A)
    n = A.shape[0]
    try:
        return np.linalg.cholesky(A), 0.0
    except np.linalg.LinAlgError:
        if not jitter:
            raise NotPositiveDefiniteError("matrix is not positive definite") from None
    base = np.trace(A) / n
    if not base > 0.0:
        raise NotPositiveDefiniteError("matrix has nonpositive trace")
    for rel in JITTER_LADDER:
        eps = rel * base
        try:
            return np.linalg.cholesky(A + eps * np.eye(n)), eps
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveDefiniteError(
        f"Cholesky failed even with jitter {JITTER_LADDER[-1]:g}*trace/n"
    )


def _check_factor(L):
    L = np.asarray(L, dtype=float)
    if np.any(np.diag(L) == 0.0):
        raise SingularFactorError("Cholesky factor has a zero on its diagonal")
    return L


def spd_solve(L, b) -> np.ndarray:
    """Solve ``(L L^T) x = b`` by forward and back substitution."""
    L = _check_factor(L)
    y = solve_triangular(L, b, lower=True, check_finite=False)
    return solve_triangular(L.T, y, lower=False, check_finite=False)


def logdet(L) -> float:
    """``log det(L L^T) = 2 sum log L_ii``."""
    L = _check_factor(L)
    return 2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))


def _off_norm(A) -> float:
    """Frobenius norm of the off-diagonal part, summed directly (no cancellation)."""
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def sym_eigen(A, max_sweeps: int = 100):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues in descending order and the matching orthonormal
    eigenvectors as columns.  Each eigenvector's largest-magnitude component
    is made positive.
    """
    A = as_symmetric(A).copy()
    n = A.shape[0]
    V = np.eye(n)
    fro = np.linalg.norm(A)
    tol = 1e-12 * fro
    for _ in range(max_sweeps):
        if _off_norm(A) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q]
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :]
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        if _off_norm(A) > tol:
            raise EigenConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    vals, V = vals[order], V[:, order]
    lead = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[lead, np.arange(n)])
    return vals, V
