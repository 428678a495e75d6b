"""Fixed-similarity baselines: LDA, LPP and LFDA.

All three are written in graph form. For a symmetric weight matrix ``A``,

    1/2 * sum_ij A_ij (x_i - x_j)(x_i - x_j)^T = X (diag(A 1) - A) X^T,

so each scatter matrix is a weighted Laplacian sandwiched by the data.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .alternating import median_heat_t
from .eigensolve import generalized_eig_largest, generalized_eig_smallest, ridge_shift
from .similarity import pairwise_sq_dists
from .types import LabeledDataset, ProjectionModel

__all__ = [
    "AffinityParams",
    "pairwise_scatter",
    "within_scatter",
    "between_scatter",
    "lda_weights",
    "lfda_weights",
    "heat_affinity",
    "lda_fit",
    "lpp_fit",
    "lfda_fit",
]


@dataclass(frozen=True)
class AffinityParams:
    """Heat-kernel graph settings.

    heat_t : bandwidth ``t`` of ``exp(-||x_i - x_j||^2 / t)``; ``None`` uses
        the median squared pairwise distance of the training data.
    knn_k : if set, keep only mutual ``knn_k``-nearest-neighbor pairs.
    """

    heat_t: Optional[float] = None
    knn_k: Optional[int] = None

    def __post_init__(self):
        if self.heat_t is not None and not self.heat_t > 0:
            raise ValueError("heat_t must be positive")
        if self.knn_k is not None and self.knn_k < 1:
            raise ValueError("knn_k must be >= 1")

    @property
    def mode(self) -> str:
        return "dense" if self.knn_k is None else "knn-sparsified"


def pairwise_scatter(X, A) -> np.ndarray:
    """``1/2 sum_ij A_ij (x_i - x_j)(x_i - x_j)^T`` for symmetric ``A``."""
    X = np.asarray(X, dtype=float)
    A = 0.5 * (A + A.T)
    L = np.diag(A.sum(axis=1)) - A
    M = X @ L @ X.T
    return 0.5 * (M + M.T)


def within_scatter(ds: LabeledDataset) -> np.ndarray:
    """Sum over classes of outer products of class-centered samples."""
    Sw = np.zeros((ds.n_features, ds.n_features))
    for c in range(ds.n_classes):
        Xc = ds.class_features(c)
        if Xc.shape[1] == 0:
            continue
        Z = Xc - Xc.mean(axis=1, keepdims=True)
        Sw += Z @ Z.T
    return Sw


def between_scatter(ds: LabeledDataset) -> np.ndarray:
    """``sum_c N_c (m_c - m)(m_c - m)^T``, the size-weighted between-class
    scatter (equal to the total minus the within-class scatter)."""
    m = ds.features.mean(axis=1)
    Sb = np.zeros((ds.n_features, ds.n_features))
    for c in range(ds.n_classes):
        Xc = ds.class_features(c)
        if Xc.shape[1] == 0:
            continue
        v = Xc.mean(axis=1) - m
        Sb += Xc.shape[1] * np.outer(v, v)
    return Sb


def lda_weights(labels) -> tuple[np.ndarray, np.ndarray]:
    """Label-only pair weights ``(A_w, A_b)``.

    Same-class pairs: ``1/N_l`` and ``1/N - 1/N_l`` (the latter is <= 0);
    different-class pairs: ``0`` and ``1/N``.
    """
    y = np.asarray(labels)
    N = y.size
    same = y[:, None] == y[None, :]
    counts = np.bincount(y)
    inv_nl = 1.0 / counts[y][:, None]
    Aw = np.where(same, inv_nl, 0.0)
    Ab = np.where(same, 1.0 / N - inv_nl, 1.0 / N)
    return Aw, Ab


def heat_affinity(X, ap: AffinityParams = AffinityParams()) -> np.ndarray:
    """Heat-kernel affinities between columns of ``X``; zero diagonal."""
    D = pairwise_sq_dists(X)
    t = ap.heat_t if ap.heat_t is not None else median_heat_t(X)
    A = np.exp(-D / t)
    np.fill_diagonal(A, 0.0)
    if ap.knn_k is not None:
        n = D.shape[0]
        Dm = D + np.diag(np.full(n, np.inf))
        nn = np.argsort(Dm, axis=1, kind="stable")[:, :ap.knn_k]
        mask = np.zeros((n, n), dtype=bool)
        mask[np.repeat(np.arange(n), nn.shape[1]), nn.ravel()] = True
        A = np.where(mask & mask.T, A, 0.0)
    return A


def lfda_weights(ds: LabeledDataset, ap: AffinityParams = AffinityParams()
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Label weights of :func:`lda_weights` modulated by heat-kernel
    affinities on same-class pairs."""
    X, y = ds.features, ds.labels
    N = y.size
    same = y[:, None] == y[None, :]
    if ap.heat_t is not None and np.isinf(ap.heat_t):
        H = np.ones((N, N))
    else:
        # one bandwidth for all classes, taken from the whole training set
        H = np.where(same, heat_affinity(X, ap), 0.0)
    inv_nl = 1.0 / np.bincount(y, minlength=ds.n_classes)[y][:, None]
    Aw = np.where(same, H * inv_nl, 0.0)
    Ab = np.where(same, H * (1.0 / N - inv_nl), 1.0 / N)
    return Aw, Ab


def _unit_columns(W: np.ndarray) -> np.ndarray:
    return W / np.linalg.norm(W, axis=0, keepdims=True)


def _discriminant(Sb, Sw, d, ridge, fallback) -> np.ndarray:
    B = Sw + ridge_shift(Sw, ridge, fallback) * np.eye(Sw.shape[0])
    W = generalized_eig_largest(Sb, B, d).vectors
    return _unit_columns(W)


def lda_fit(ds: LabeledDataset, d: int, ridge: float = 1e-8) -> ProjectionModel:
    """Top-``d`` generalized eigenvectors of ``(S_b, S_w + ridge)``, unit
    Euclidean columns."""
    Sw, Sb = within_scatter(ds), between_scatter(ds)
    fallback = max(float(np.trace(Sw + Sb)) / ds.n_features, 1.0)
    W = _discriminant(Sb, Sw, d, ridge, fallback)
    return ProjectionModel(w=W, method="lda", config={"d": d, "ridge": ridge})


def lpp_fit(ds: LabeledDataset, d: int, ap: AffinityParams = AffinityParams(),
            ridge: float = 1e-8) -> ProjectionModel:
    """Smallest generalized eigenvectors of ``(X L X^T, X Deg X^T + ridge)``
    for the heat-kernel graph over all training samples."""
    X = ds.features
    A = heat_affinity(X, ap)
    deg = A.sum(axis=1)
    M = X @ (np.diag(deg) - A) @ X.T
    B = (X * deg) @ X.T
    B = 0.5 * (B + B.T)
    fallback = max(float(np.trace(X @ X.T)) / X.shape[0], 1.0)
    B = B + ridge_shift(B, ridge, fallback) * np.eye(B.shape[0])
    W = generalized_eig_smallest(0.5 * (M + M.T), B, d).vectors
    return ProjectionModel(w=W, method="lpp",
                           config={"d": d, "heat_t": ap.heat_t, "knn_k": ap.knn_k,
                                   "ridge": ridge})


def lfda_fit(ds: LabeledDataset, d: int, ap: AffinityParams = AffinityParams(),
             ridge: float = 1e-8) -> ProjectionModel:
    """Top-``d`` generalized eigenvectors of the locally weighted between-
    and within-class scatters."""
    Aw, Ab = lfda_weights(ds, ap)
    Sw = pairwise_scatter(ds.features, Aw)
    Sb = pairwise_scatter(ds.features, Ab)
    fallback = max(float(np.trace(Sw + Sb)) / ds.n_features, 1.0)
    W = _discriminant(Sb, Sw, d, ridge, fallback)
    return ProjectionModel(w=W, method="lfda",
                           config={"d": d, "heat_t": ap.heat_t, "knn_k": ap.knn_k,
                                   "ridge": ridge})
