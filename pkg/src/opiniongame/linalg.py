"""Dense linear-algebra kernels: pivoted solves, Cholesky, symmetric and
symmetric-definite eigenproblems.

LAPACK (through numpy/scipy) does the factorisations; this module pins the
contracts the rest of the toolkit relies on: residual checks, an upper
Cholesky factor, ascending eigenvalues and a deterministic eigenvector sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotPositiveDefiniteError, NumericalError, SingularMatrixError

SOLVE_RTOL = 1e-10
EIGEN_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class SymmetricEigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    R: np.ndarray  # upper triangular, M = R^T R


def relative_residual(M, z, b) -> float:
    M, z, b = np.asarray(M), np.asarray(z), np.asarray(b)
    r = M @ z - b
    denom = np.abs(M).sum(axis=1).max(initial=0.0) * np.abs(z).max(initial=0.0) + np.abs(b).max(initial=0.0)
    if denom == 0.0:
        return 0.0
    return float(np.abs(r).max(initial=0.0) / denom)


def solve_linear(M, b, rtol: float = SOLVE_RTOL) -> np.ndarray:
    """Solve ``M z = b`` by row-pivoted LU; ``b`` may be a vector or a matrix of columns."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    if M.shape[0] == 0:
        return b.copy()
    try:
        z = np.linalg.solve(M, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"matrix is singular: {exc}") from None
    if not np.all(np.isfinite(z)):
        raise SingularMatrixError("matrix is singular to working precision")
    res = relative_residual(M, z, b)
    if res > rtol:
        raise SingularMatrixError(f"solve residual {res:.3e} exceeds {rtol:.1e}; matrix is ill-conditioned")
    return z


def cholesky(M) -> CholeskyFactor:
    """Upper Cholesky factor ``R`` with positive diagonal, ``M = R^T R``."""
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    try:
        lower = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("matrix is not positive definite") from None
    R = lower.T.copy()
    if np.any(np.diag(R) <= 0):
        raise NotPositiveDefiniteError("non-positive pivot in Cholesky factor")
    return CholeskyFactor(R=R)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry is positive (first index wins ties)."""
    V = np.array(V, dtype=float, copy=True)
    if V.size == 0:
        return V
    mag = np.abs(V)
    # Near-ties are resolved to the lowest index so rounding noise cannot flip the sign.
    top = mag.max(axis=0)
    idx = np.argmax(mag >= top - 1e-12 * np.maximum(top, 1.0), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def fix_sign(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return v.copy()
    mag = np.abs(v)
    top = mag.max()
    i = int(np.argmax(mag >= top - 1e-12 * max(top, 1.0)))
    return -v if v[i] < 0 else v.copy()


def sym_eigen(M) -> SymmetricEigenDecomposition:
    """Eigen-decomposition of a symmetric matrix, eigenvalues ascending."""
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    if not np.all(np.isfinite(M)):
        raise NumericalError("matrix has non-finite entries")
    lam, Q = np.linalg.eigh(M)
    Q = _fix_signs(Q)
    return SymmetricEigenDecomposition(eigenvalues=lam, eigenvectors=Q)


def gen_eigen_max(C, B) -> tuple[float, np.ndarray]:
    """Largest ``lam`` with ``C x = lam B x`` and its ``B``-normalised eigenvector.

    Reduces to a standard problem through ``B = R^T R``:
    ``(R^{-T} C R^{-1}) (R x) = lam (R x)``.
    """
    C = np.asarray(C, dtype=float)
    C = 0.5 * (C + C.T)
    R = cholesky(B).R
    # K = R^{-T} C R^{-1}
    X = solve_triangular(R, C, trans="T", lower=False)
    K = solve_triangular(R, X.T, trans="T", lower=False).T
    dec = sym_eigen(K)
    u = dec.eigenvectors[:, -1]
    x = solve_triangular(R, u, lower=False)
    return float(dec.eigenvalues[-1]), fix_sign(x)
