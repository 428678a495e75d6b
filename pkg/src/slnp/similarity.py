"""Adaptive within-class neighbor similarities.

For a fixed projection, each sample ``j`` of class ``c`` gets a weight row
over its classmates. Only the ``K`` nearest candidates in the embedded space
receive positive weight; the regularization weight ``gamma`` of the row is
set in closed form from those ``K`` distances, and the weights follow as an
affine decreasing function of distance that sums to one.

Distances throughout are *squared* Euclidean distances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import GammaZero, KTooLarge, NonFiniteInput
from .types import RegularizationMatrix, SimilarityBlocks

__all__ = [
    "NeighborRow",
    "pairwise_sq_dists",
    "neighbor_row",
    "gamma_star",
    "gamma_bounds",
    "eta",
    "similarity_row",
    "simplex_project_oracle",
    "s_step",
]


@dataclass(frozen=True, eq=False)
class NeighborRow:
    """Candidates of one sample sorted by ascending squared distance.

    Ties are ordered by ascending within-class index. ``self_position`` is
    ``None`` when the sample itself was excluded from the candidates.
    """

    sorted_sq_dists: np.ndarray
    source_indices: np.ndarray
    self_position: Optional[int]
    n_class: int

    def __len__(self):
        return self.sorted_sq_dists.shape[0]


def pairwise_sq_dists(Y) -> np.ndarray:
    """Squared Euclidean distances between the columns of ``Y`` (d x n)."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[None, :]
    if not np.all(np.isfinite(Y)):
        raise NonFiniteInput("embedded samples contain non-finite values")
    D = cdist(Y.T, Y.T, "sqeuclidean")
    np.fill_diagonal(D, 0.0)
    return D


def neighbor_row(dist_row, self_index: int, K: int,
                 include_self: bool = False) -> NeighborRow:
    """Sort the candidate neighbors of sample ``self_index``.

    Raises :class:`KTooLarge` when fewer than ``K`` candidates exist.
    """
    dist_row = np.asarray(dist_row, dtype=float)
    n = dist_row.shape[0]
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    cand = np.arange(n)
    if not include_self:
        cand = cand[cand != self_index]
    if K > cand.size:
        raise KTooLarge(f"K={K} exceeds the {cand.size} available candidates")
    # stable sort over index-ordered candidates breaks ties by index
    order = np.argsort(dist_row[cand], kind="stable")
    src = cand[order]
    dists = dist_row[src]
    pos = int(np.flatnonzero(src == self_index)[0]) if include_self else None
    return NeighborRow(dists, src, pos, n)


def gamma_star(row: NeighborRow, K: int) -> float:
    """Closed-form regularization weight ``(K-1)/2 * ||d[:K]||``."""
    d = row.sorted_sq_dists[:K]
    if d.shape[0] < K:
        raise KTooLarge(f"row has {d.shape[0]} candidates, K={K}")
    return 0.5 * (K - 1) * math.hypot(*d)


def gamma_bounds(row: NeighborRow, K: int) -> tuple[float, float]:
    """Range of ``gamma`` for which exactly the ``K`` nearest get positive
    weight. The upper bound is ``inf`` when no ``(K+1)``-th candidate exists."""
    d = row.sorted_sq_dists
    if d.shape[0] < K:
        raise KTooLarge(f"row has {d.shape[0]} candidates, K={K}")
    half_sum = 0.5 * math.fsum(d[:K])
    low = 0.5 * K * d[K - 1] - half_sum
    high = 0.5 * K * d[K] - half_sum if d.shape[0] > K else math.inf
    return low, high


def eta(row: NeighborRow, K: int, gamma: float) -> float:
    """Multiplier of the sum-to-one constraint for a given ``gamma > 0``."""
    if not gamma > 0:
        raise GammaZero("eta is undefined for gamma = 0; use uniform weights")
    return (math.fsum(row.sorted_sq_dists[:K]) / (2.0 * gamma) + 1.0) / K


def similarity_row(row: NeighborRow, K: int) -> np.ndarray:
    """Weight vector of length ``row.n_class`` supported on the K nearest.

    Negative values from the closed form are clamped to zero and the row is
    renormalized. When all K nearest distances are zero the weights are
    uniform over them.
    """
    d = row.sorted_sq_dists[:K]
    g = gamma_star(row, K)
    if g > 0:
        s = eta(row, K, g) - d / (2.0 * g)
        s = np.maximum(s, 0.0)
        s /= s.sum()
    else:
        s = np.full(K, 1.0 / K)
    out = np.zeros(row.n_class)
    out[row.source_indices[:K]] = s
    return out


def simplex_project_oracle(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-and-threshold method; used as an independent reference for
    :func:`similarity_row`.
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u + (1.0 - css) / k > 0)[-1]
    tau = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + tau, 0.0)


def s_step(Y_by_class: Sequence[np.ndarray], K: int,
           include_self: bool = False) -> tuple[SimilarityBlocks, RegularizationMatrix]:
    """Recompute every similarity row and its gamma from embedded classes.

    ``Y_by_class[c]`` is the ``d x N_c`` embedding of class ``c``.
    """
    blocks, gammas = [], []
    for c, Y in enumerate(Y_by_class):
        D = pairwise_sq_dists(Y)
        n = D.shape[0]
        S = np.zeros((n, n))
        g = np.zeros(n)
        for j in range(n):
            try:
                row = neighbor_row(D[j], j, K, include_self)
            except KTooLarge as e:
                raise KTooLarge(f"class {c}, sample {j}: {e}") from None
            g[j] = gamma_star(row, K)
            S[j] = similarity_row(row, K)
        S.setflags(write=False)
        g.setflags(write=False)
        blocks.append(S)
        gammas.append(g)
    return SimilarityBlocks(tuple(blocks)), RegularizationMatrix(tuple(gammas))
