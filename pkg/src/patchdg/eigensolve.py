"""Generalized symmetric eigensolves A x = lambda M x.

Two routes: a dense full-spectrum path (Cholesky reduction to a standard
symmetric problem, used by the reliable-count experiment which consumes
large spectrum fractions) and a shift-invert Lanczos path for the k
smallest pairs (A factored once, Krylov iteration with M inner products
and full reorthogonalization via ARPACK).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MassNotSPD, NoConvergence, PenaltyTooSmall, StiffnessNotSPD

DENSE_THRESHOLD = 6000


@dataclass
class EigenResult:
    values: np.ndarray     # ascending
    vectors: np.ndarray    # (n, k), M-orthonormal columns
    residuals: np.ndarray  # ||A x - lambda M x|| / ||A x|| per pair


def _full(mat):
    return mat.full() if hasattr(mat, "full") else sp.csr_matrix(mat)


def _fix_signs(vectors):
    for j in range(vectors.shape[1]):
        i = np.argmax(np.abs(vectors[:, j]))
        if vectors[i, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return vectors


def _residuals(A, M, values, vectors):
    R = A @ vectors - (M @ vectors) * values[None, :]
    num = np.linalg.norm(R, axis=0)
    den = np.linalg.norm(A @ vectors, axis=0)
    den[den == 0.0] = 1.0
    return num / den


def _residual_floor(A, vectors):
    """Roundoff floor of the relative residual: evaluating A x - lambda M x
    cancels to eps * ||A|| * ||x||, so for small eigenvalues the quotient
    cannot reach arbitrary tolerances no matter how converged the pair is."""
    norm_a = spla.norm(A, np.inf)
    den = np.linalg.norm(A @ vectors, axis=0)
    den[den == 0.0] = 1.0
    return np.finfo(float).eps * norm_a * np.linalg.norm(vectors, axis=0) / den


def solve_dense(A, M):
    """All eigenpairs of the pencil (A, M); M must be SPD."""
    A, M = _full(A), _full(M)
    n = A.shape[0]
    if n > DENSE_THRESHOLD:
        raise ValueError(f"dense path limited to n <= {DENSE_THRESHOLD}, got {n}")
    Ad, Md = A.toarray(), M.toarray()
    try:
        np.linalg.cholesky(Md)
    except np.linalg.LinAlgError:
        raise MassNotSPD("mass matrix is not positive definite") from None
    values, vectors = la.eigh(Ad, Md)
    norm_a = spla.norm(A, np.inf)
    if values[0] <= -1e-8 * norm_a:
        raise PenaltyTooSmall(
            f"stiffness is indefinite (lambda_min = {values[0]:.3e}); raise the penalties"
        )
    vectors = _fix_signs(vectors)
    return EigenResult(values, vectors, _residuals(A, M, values, vectors))


def solve_smallest(A, M, k, tol=1e-9, maxiter=None):
    """The k smallest eigenpairs by shift-invert at zero.

    Falls back to the dense path when k is too close to n for the Krylov
    process (documented fallback for k = n).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    A, M = _full(A), _full(M)
    n = A.shape[0]
    if k > n:
        raise ValueError(f"requested {k} pairs from an n = {n} pencil")
    if k >= n - 1 or n <= 32:
        res = solve_dense(A, M)
        return EigenResult(res.values[:k], res.vectors[:, :k], res.residuals[:k])

    try:
        values, vectors = spla.eigsh(
            A.tocsc(),
            k=k,
            M=M.tocsc(),
            sigma=0.0,
            which="LM",
            tol=0.0,
            maxiter=maxiter if maxiter is not None else 50 * k,
        )
    except spla.ArpackNoConvergence as exc:
        raise NoConvergence(f"shift-invert Lanczos did not converge: {exc}") from None

    order = np.argsort(values)
    values, vectors = values[order], vectors[:, order]
    norm_a = spla.norm(A, np.inf)
    if values[0] <= -1e-8 * norm_a:
        raise StiffnessNotSPD(
            f"stiffness is indefinite (lambda_min = {values[0]:.3e})"
        )
    vectors = _fix_signs(vectors)
    res = _residuals(A, M, values, vectors)
    bound = np.maximum(tol, 100.0 * _residual_floor(A, vectors))
    if np.any(res > bound):
        raise NoConvergence(
            f"residuals up to {res.max():.3e} exceed the requested tolerance {tol:g}"
        )
    return EigenResult(values, vectors, res)
