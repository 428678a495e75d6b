"""Joint learning of within-class neighbor similarities and a projection.

The fit alternates three closed-form updates: the projection from the
current similarities (a whitened generalized eigenproblem), the per-sample
regularization weights from embedded neighbor distances, and the similarity
rows themselves. See :func:`fit`.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .eigensolve import generalized_eig_smallest, pca_fit, total_scatter
from .errors import ShapeMismatch
from .similarity import pairwise_sq_dists, s_step
from .types import (
    LabeledDataset,
    ProjectionModel,
    RegularizationMatrix,
    SimilarityBlocks,
    TrainConfig,
    TrainTrace,
)

__all__ = ["LaplacianBundle", "build_laplacian", "objective", "w_step",
           "fit", "transform", "FitResult", "median_heat_t", "heat_row"]


@dataclass(frozen=True, eq=False)
class LaplacianBundle:
    sym_blocks: tuple
    degree: tuple
    laplacian: tuple

    def global_laplacian(self) -> np.ndarray:
        """Block-diagonal Laplacian over samples in class-sorted order."""
        return scipy.linalg.block_diag(*self.laplacian)


def build_laplacian(S: SimilarityBlocks) -> LaplacianBundle:
    """Per-class ``L_c = diag(rowsum(A_c)) - A_c`` with ``A_c = (S_c + S_c^T)/2``."""
    sym, deg, lap = [], [], []
    for Sc in S.blocks:
        A = 0.5 * (Sc + Sc.T)
        dg = A.sum(axis=1)
        sym.append(A)
        deg.append(dg)
        lap.append(np.diag(dg) - A)
    return LaplacianBundle(tuple(sym), tuple(deg), tuple(lap))


def objective(S: SimilarityBlocks, W, R: RegularizationMatrix,
              ds: LabeledDataset) -> tuple[float, float, float]:
    """Return ``(J, embed_term, penalty_term)``.

    ``embed_term = sum_cjk s_cjk ||W^T x_cj - W^T x_ck||^2`` and
    ``penalty_term = sum_cjk gamma_cj s_cjk^2``.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != ds.n_features:
        raise ShapeMismatch(f"W has shape {W.shape}, features have {ds.n_features} rows")
    if len(S) != ds.n_classes or len(R) != ds.n_classes:
        raise ShapeMismatch("similarity / gamma blocks do not match the class count")
    embed = penalty = 0.0
    for c in range(ds.n_classes):
        Sc, g = S[c], np.asarray(R[c])
        n = len(ds.class_index[c])
        if Sc.shape != (n, n) or g.shape != (n,):
            raise ShapeMismatch(f"class {c}: blocks sized {Sc.shape}/{g.shape}, expected {n}")
        Dc = pairwise_sq_dists(W.T @ ds.class_features(c))
        embed += float(np.sum(Sc * Dc))
        penalty += float(np.sum(g[:, None] * Sc ** 2))
    return embed + penalty, embed, penalty


def _graph_matrix(ds: LabeledDataset, lap: LaplacianBundle) -> np.ndarray:
    A = np.zeros((ds.n_features, ds.n_features))
    for c, Lc in enumerate(lap.laplacian):
        Xc = ds.class_features(c)
        A += Xc @ Lc @ Xc.T
    return 0.5 * (A + A.T)


def w_step(ds: LabeledDataset, S: SimilarityBlocks, d: int, ridge: float = 1e-8,
           scatter=None) -> np.ndarray:
    """Projection minimizing the similarity-weighted embedded distances under
    ``W^T S_t W = I``: the ``d`` smallest generalized eigenvectors of
    ``(X L X^T, S_t)``."""
    if scatter is None:
        scatter = total_scatter(ds, ridge).matrix
    A = _graph_matrix(ds, build_laplacian(S))
    return generalized_eig_smallest(A, scatter, d).vectors


class FitResult(NamedTuple):
    model: ProjectionModel
    similarity: SimilarityBlocks
    gammas: RegularizationMatrix
    trace: TrainTrace


def median_heat_t(X) -> float:
    """Median of the off-diagonal squared distances between columns; 1.0
    when all columns coincide."""
    D = pairwise_sq_dists(X)
    off = D[~np.eye(D.shape[0], dtype=bool)]
    t = float(np.median(off)) if off.size else 0.0
    return t if t > 0 else 1.0


def heat_row(Xc, j: int, t=None) -> np.ndarray:
    """Heat-kernel affinities ``exp(-||x_j - x_k||^2 / t)`` of column ``j``."""
    if t is None:
        t = median_heat_t(Xc)
    return np.exp(-pairwise_sq_dists(Xc)[j] / t)


def fit(ds: LabeledDataset, cfg: TrainConfig) -> FitResult:
    """Alternate projection, gamma and similarity updates until the relative
    change of the objective drops below ``cfg.rel_tol``.

    With ``cfg.d_pca`` set, the data is first reduced by PCA and the returned
    model composes both maps. Similarities start uniform over each class,
    self included. Each iteration runs the projection update against the
    previous similarities, then recomputes gammas and similarities from the
    new embedding, then records the objective.
    """
    cfg.validate(ds)
    trace = TrainTrace(watch=cfg.watch)
    pca = None
    work = ds
    if cfg.d_pca is not None:
        pca = pca_fit(ds, cfg.d_pca)
        work = ds.with_features(pca.transform(ds.features))

    S = SimilarityBlocks.uniform(work.class_sizes)
    R = RegularizationMatrix(tuple(np.zeros(n) for n in work.class_sizes))
    if cfg.watch is not None:
        c, j = cfg.watch
        trace.snapshots.append(np.array(S[c][j]))
        trace.watch_heat = heat_row(ds.class_features(c), j)

    St = total_scatter(work, cfg.ridge).matrix
    J_prev = None
    W = None
    for p in range(1, cfg.max_iters + 1):
        t0 = time.perf_counter()
        W = w_step(work, S, cfg.d, scatter=St)
        Y = [W.T @ work.class_features(c) for c in range(work.n_classes)]
        S, R = s_step(Y, cfg.K, cfg.include_self)
        J, embed, penalty = objective(S, W, R, work)
        g = R.flat()
        trace.record(iter=p, J=J, embed_term=embed, penalty_term=penalty,
                     gamma_mean=float(g.mean()), gamma_min=float(g.min()),
                     gamma_max=float(g.max()), seconds=time.perf_counter() - t0)
        if cfg.watch is not None:
            trace.snapshots.append(np.array(S[cfg.watch[0]][cfg.watch[1]]))
        if J == 0.0:
            # J >= 0, so zero is a global minimum
            trace.converged = True
            break
        if J_prev is not None and abs(J - J_prev) <= cfg.rel_tol * abs(J_prev):
            trace.converged = True
            break
        J_prev = J

    model = ProjectionModel(
        w=W, method="slnp",
        w_pca=None if pca is None else pca.w,
        mean=None if pca is None else pca.mean,
        config=cfg.to_dict(),
        info={"n_iter": len(trace), "converged": trace.converged},
    )
    return FitResult(model, S, R, trace)


def transform(model: ProjectionModel, X) -> np.ndarray:
    return model.transform(X)
