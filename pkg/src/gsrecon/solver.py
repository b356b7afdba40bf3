"""Least-squares solver and Hermitian spectral utilities.

The reconstruction coefficients solve U alpha ~ f_hat in the least
squares sense, i.e. the normal equations A alpha = U^H f_hat with
A = U^H U.  Conjugate gradients on the normal equations (CGNR) is used
matrix-free for larger column counts; eigen-extremes and generalized
minimal eigenvalues back the conditioning diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SolveReport",
    "NonPositiveDefiniteError",
    "normal_matrix",
    "cgnr_solve",
    "hermitian_eig_extremes",
    "generalized_lambda_min",
    "condition_number",
]

EXPLICIT_NORMAL_LIMIT = 64


class NonPositiveDefiniteError(ValueError):
    """Cholesky factorisation failed: the matrix is not positive definite."""


@dataclass
class SolveReport:
    """Outcome of a least-squares solve."""

    coefficients: np.ndarray
    iterations: int
    relative_residual: float
    converged: bool


def normal_matrix(U) -> np.ndarray:
    """A = U^H U, symmetrised to kill rounding skew."""
    entries = U.entries if hasattr(U, "entries") else np.asarray(U)
    a = entries.conj().T @ entries
    return 0.5 * (a + a.conj().T)


def _rhs_values(rhs) -> np.ndarray:
    if hasattr(rhs, "values"):
        return np.asarray(rhs.values, dtype=complex)
    return np.asarray(rhs, dtype=complex)


def cgnr_solve(U, rhs, tol: float = 1e-12, maxit: int | None = None) -> SolveReport:
    """Conjugate gradients on the normal equations of U alpha ~ rhs.

    Matrix-free (two m x n products per iteration) for more than 64
    columns, explicit normal matrix otherwise.  Starts from zero and
    stops when the normal-equation residual drops below tol relative to
    ||U^H rhs||.  Non-convergence is reported, never raised.
    """
    entries = U.entries if hasattr(U, "entries") else np.asarray(U)
    m, n = entries.shape
    if tol < 1e-15:
        raise ValueError("tol must be at least 1e-15")
    f_hat = _rhs_values(rhs)
    if f_hat.size != m:
        raise ValueError(f"rhs has {f_hat.size} entries, matrix has {m} rows")
    if maxit is None:
        maxit = max(50, 4 * n)

    if n <= EXPLICIT_NORMAL_LIMIT:
        a = normal_matrix(entries)
        apply_a = lambda v: a @ v
    else:
        apply_a = lambda v: entries.conj().T @ (entries @ v)

    b = entries.conj().T @ f_hat
    bnorm = np.linalg.norm(b)
    x = np.zeros(n, dtype=complex)
    if bnorm == 0.0:
        return SolveReport(x, 0, 0.0, True)
    r = b.copy()
    p = r.copy()
    rs = np.vdot(r, r).real
    iterations = 0
    for iterations in range(1, maxit + 1):
        ap = apply_a(p)
        denom = np.vdot(p, ap).real
        if denom <= 0.0:
            break  # A is singular in the Krylov direction; stop with what we have
        alpha = rs / denom
        x += alpha * p
        r -= alpha * ap
        rs_new = np.vdot(r, r).real
        if np.sqrt(rs_new) <= tol * bnorm:
            rs = rs_new
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    relative = float(np.linalg.norm(b - apply_a(x)) / bnorm)
    return SolveReport(x, iterations, relative, relative <= tol)


def hermitian_eig_extremes(B) -> tuple:
    """Smallest and largest eigenvalue of a Hermitian matrix.

    Delegates to LAPACK's tridiagonalisation + implicit-shift solve
    (numpy.linalg.eigvalsh), which meets the 1e-11 relative contract.
    """
    b = np.asarray(B)
    if b.shape[0] != b.shape[1]:
        raise ValueError("matrix must be square")
    if b.shape[0] > 512:
        raise ValueError("eig extremes are limited to n <= 512")
    vals = np.linalg.eigvalsh(b)
    return float(vals[0]), float(vals[-1])


def generalized_lambda_min(Atilde, A) -> float:
    """lambda_min of Atilde^{-1} A for Hermitian Atilde > 0, A >= 0.

    Factor Atilde = D^H D and return the minimal eigenvalue of
    D^{-H} A D^{-1}, which shares the spectrum of Atilde^{-1} A.
    """
    at = np.asarray(Atilde)
    a = np.asarray(A)
    try:
        chol = np.linalg.cholesky(at)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveDefiniteError("Gram matrix is not positive definite") from exc
    y = np.linalg.solve(chol, a)
    mid = np.linalg.solve(chol, y.conj().T).conj().T
    mid = 0.5 * (mid + mid.conj().T)
    return float(np.linalg.eigvalsh(mid)[0])


def condition_number(B) -> float:
    """Ratio of extreme eigenvalues of a Hermitian positive definite matrix."""
    lo, hi = hermitian_eig_extremes(B)
    if lo <= 0.0:
        return float("inf")
    return hi / lo
