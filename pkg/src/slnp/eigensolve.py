"""Dense symmetric eigen kernels, total scatter and PCA."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionTooLarge,
    NoConvergence,
    NotPositiveDefinite,
    NotSymmetric,
    SingleSample,
)
from .types import LabeledDataset, ProjectionModel

__all__ = [
    "ScatterMatrix",
    "EigenResult",
    "ridge_shift",
    "total_scatter",
    "sym_eig",
    "generalized_eig",
    "generalized_eig_smallest",
    "generalized_eig_largest",
    "pca_fit",
]


@dataclass(frozen=True, eq=False)
class ScatterMatrix:
    matrix: np.ndarray
    ridge_applied: float


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Eigenvalues in ascending order with paired eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray
    normalization: str  # "unit-norm" or "B-orthonormal"


def _as_matrix(X) -> np.ndarray:
    if isinstance(X, LabeledDataset):
        return X.features
    return np.asarray(X, dtype=float)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column is made positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _check_symmetric(A: np.ndarray, name: str, rtol: float = 1e-10) -> np.ndarray:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetric(f"{name} must be square, got {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > rtol * scale:
        raise NotSymmetric(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def ridge_shift(M: np.ndarray, ridge: float, fallback_scale: float = 1.0) -> float:
    """Absolute diagonal shift ``ridge * trace(M) / dim``.

    A zero-trace matrix falls back to ``fallback_scale`` so the shifted
    matrix stays positive definite.
    """
    scale = float(np.trace(M)) / M.shape[0]
    if not scale > 0:
        scale = fallback_scale
    return ridge * scale


def total_scatter(X, ridge: float = 0.0) -> ScatterMatrix:
    """Sum of outer products of mean-centered samples, plus a relative ridge.

    ``X`` is a ``D x N`` matrix or a :class:`LabeledDataset`.
    """
    X = _as_matrix(X)
    if X.shape[1] < 2:
        raise SingleSample("total scatter needs at least two samples")
    Xc = X - X.mean(axis=1, keepdims=True)
    St = Xc @ Xc.T
    St = 0.5 * (St + St.T)
    shift = ridge_shift(St, ridge)
    if shift:
        St = St + shift * np.eye(St.shape[0])
    return ScatterMatrix(St, shift)


def sym_eig(A) -> EigenResult:
    """Full ascending spectrum of a symmetric matrix with orthonormal,
    sign-normalized eigenvectors."""
    A = _check_symmetric(np.asarray(A, dtype=float), "A")
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(str(e)) from None
    return EigenResult(w, _fix_signs(V), "unit-norm")


def generalized_eig(A, B) -> EigenResult:
    """Solve ``A w = lambda B w`` for symmetric ``A`` and SPD ``B``.

    ``B = L L^T`` is factored, the symmetric problem
    ``L^{-1} A L^{-T} v = lambda v`` is solved densely and ``w = L^{-T} v``.
    Columns satisfy ``W^T B W = I``.
    """
    A = _check_symmetric(np.asarray(A, dtype=float), "A")
    B = _check_symmetric(np.asarray(B, dtype=float), "B")
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    try:
        L = scipy.linalg.cholesky(B, lower=True)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("B is not positive definite") from None
    T = scipy.linalg.solve_triangular(L, A, lower=True)
    C = scipy.linalg.solve_triangular(L, T.T, lower=True)
    C = 0.5 * (C + C.T)
    try:
        w, V = np.linalg.eigh(C)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(str(e)) from None
    W = scipy.linalg.solve_triangular(L, V, lower=True, trans="T")
    return EigenResult(w, _fix_signs(W), "B-orthonormal")


def _check_d(d: int, n: int) -> None:
    if not 1 <= d <= n:
        raise DimensionTooLarge(f"requested {d} eigenvectors of a {n}x{n} problem")


def generalized_eig_smallest(A, B, d: int) -> EigenResult:
    """The ``d`` smallest generalized eigenpairs, ascending."""
    _check_d(d, np.shape(A)[0])
    res = generalized_eig(A, B)
    return EigenResult(res.values[:d], res.vectors[:, :d], res.normalization)


def generalized_eig_largest(A, B, d: int) -> EigenResult:
    """The ``d`` largest generalized eigenpairs, in descending order."""
    _check_d(d, np.shape(A)[0])
    res = generalized_eig(A, B)
    return EigenResult(res.values[::-1][:d], res.vectors[:, ::-1][:, :d],
                       res.normalization)


def pca_fit(X, d_pca: int) -> ProjectionModel:
    """Top ``d_pca`` principal directions of the sample covariance.

    Columns are ordered by descending variance; the variances are kept in
    ``model.info["variances"]`` and the mean is stored for centering.
    """
    X = _as_matrix(X)
    D, N = X.shape
    if not 1 <= d_pca <= D:
        raise DimensionTooLarge(f"d_pca={d_pca} must be in 1..{D}")
    mean = X.mean(axis=1)
    Xc = X - mean[:, None]
    if N < D:
        # thin route through the N x N Gram matrix
        U, s, _ = np.linalg.svd(Xc, full_matrices=False)
        var = s ** 2 / N
        if d_pca > U.shape[1]:
            res = sym_eig(Xc @ Xc.T / N)
            V, var = res.vectors[:, ::-1][:, :d_pca], res.values[::-1][:d_pca]
        else:
            V, var = _fix_signs(U[:, :d_pca]), var[:d_pca]
    else:
        res = sym_eig(Xc @ Xc.T / N)
        V, var = res.vectors[:, ::-1][:, :d_pca], res.values[::-1][:d_pca]
    return ProjectionModel(w=V, method="pca", mean=mean,
                           config={"d": d_pca}, info={"variances": var})
