"""Shared data model: labeled datasets, similarity blocks, gammas, models,
training configuration and traces.

Samples are stored column-wise: ``features`` has shape ``(D, N)`` so that an
embedding is the plain product ``W.T @ features``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DimensionTooLarge,
    EmptyClass,
    KTooLarge,
    LabelOutOfRange,
    NoIterations,
    NonFiniteFeature,
    PartitionMismatch,
    ShapeMismatch,
)


def _frozen(a, dtype=None):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Column-major sample matrix with dense integer labels.

    Use :func:`make_dataset` to build one; it derives ``class_index`` and
    validates every invariant.
    """

    features: np.ndarray
    labels: np.ndarray
    class_index: tuple
    n_classes: int

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def class_sizes(self) -> np.ndarray:
        return np.array([len(ix) for ix in self.class_index], dtype=int)

    def class_features(self, c: int) -> np.ndarray:
        return self.features[:, self.class_index[c]]

    def class_sorted(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, order)`` with columns grouped class by class."""
        order = np.concatenate(self.class_index)
        return self.features[:, order], order

    def subset(self, idx) -> "LabeledDataset":
        """Dataset restricted to the given columns, keeping the label space."""
        idx = np.asarray(idx, dtype=int)
        return make_dataset(self.features[:, idx], self.labels[idx],
                            n_classes=self.n_classes, allow_empty=True)

    def with_features(self, features) -> "LabeledDataset":
        features = np.asarray(features, dtype=float)
        if features.ndim != 2 or features.shape[1] != self.n_samples:
            raise ShapeMismatch(
                f"expected {self.n_samples} columns, got shape {features.shape}")
        return make_dataset(features, self.labels, n_classes=self.n_classes,
                            allow_empty=True)


def make_dataset(features, labels, n_classes: Optional[int] = None,
                 allow_empty: bool = False) -> LabeledDataset:
    """Build a validated :class:`LabeledDataset`.

    ``n_classes`` defaults to the number of distinct labels. ``allow_empty``
    permits classes without samples, which only arises for test splits that
    share the label space of a training set.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    if features.ndim != 2:
        raise ShapeMismatch(f"features must be 2-D (D, N), got {features.shape}")
    if labels.ndim != 1 or labels.shape[0] != features.shape[1]:
        raise ShapeMismatch(
            f"labels length {labels.shape} does not match {features.shape[1]} samples")
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise LabelOutOfRange("labels must be integers")
    labels = labels.astype(int)
    if n_classes is None:
        n_classes = int(np.unique(labels).size)
    class_index = tuple(np.flatnonzero(labels == c) for c in range(n_classes))
    ds = LabeledDataset(_frozen(features), _frozen(labels),
                        tuple(_frozen(ix) for ix in class_index), int(n_classes))
    return validate_dataset(ds, allow_empty=allow_empty)


def validate_dataset(ds: LabeledDataset, allow_empty: bool = False) -> LabeledDataset:
    """Return ``ds`` unchanged if all dataset invariants hold, else raise."""
    X, y, C = ds.features, ds.labels, ds.n_classes
    bad = np.flatnonzero((y < 0) | (y >= C))
    if bad.size:
        i = int(bad[0])
        raise LabelOutOfRange(f"sample {i} has label {int(y[i])}, expected 0..{C - 1}")
    nonfinite = np.argwhere(~np.isfinite(X))
    if nonfinite.size:
        r, c = (int(v) for v in nonfinite[0])
        raise NonFiniteFeature(f"feature {r} of sample {c} is not finite")
    if len(ds.class_index) != C:
        raise PartitionMismatch(f"class_index has {len(ds.class_index)} entries for {C} classes")
    seen = np.zeros(y.shape[0], dtype=int)
    for c, ix in enumerate(ds.class_index):
        if len(ix) == 0 and not allow_empty:
            raise EmptyClass(f"class {c} has no samples")
        ix = np.asarray(ix, dtype=int)
        if np.any(np.diff(ix) <= 0):
            raise PartitionMismatch(f"class {c} index list is not strictly increasing")
        wrong = ix[y[ix] != c] if ix.size else ix
        if wrong.size:
            raise PartitionMismatch(f"sample {int(wrong[0])} listed under class {c}")
        seen[ix] += 1
    off = np.flatnonzero(seen != 1)
    if off.size:
        raise PartitionMismatch(f"sample {int(off[0])} appears {int(seen[off[0]])} times in class_index")
    return ds


@dataclass(frozen=True, eq=False)
class SimilarityBlocks:
    """Per-class square similarity matrices; row ``j`` of block ``c`` holds
    the weights of sample ``j`` of class ``c`` over its classmates."""

    blocks: tuple

    @classmethod
    def uniform(cls, class_sizes: Sequence[int]) -> "SimilarityBlocks":
        return cls(tuple(_frozen(np.full((n, n), 1.0 / n)) for n in class_sizes))

    def __len__(self):
        return len(self.blocks)

    def __getitem__(self, c):
        return self.blocks[c]

    def check(self, K: Optional[int] = None, atol: float = 1e-10) -> None:
        """Raise ``ValueError`` if a row leaves the probability simplex or,
        when ``K`` is given, has more than ``K`` positive entries."""
        for c, S in enumerate(self.blocks):
            if S.ndim != 2 or S.shape[0] != S.shape[1]:
                raise ValueError(f"block {c} is not square: {S.shape}")
            if np.any(S < 0) or np.any(S > 1):
                raise ValueError(f"block {c} has entries outside [0, 1]")
            dev = np.abs(S.sum(axis=1) - 1.0)
            if np.any(dev > atol):
                j = int(np.argmax(dev))
                raise ValueError(f"row {j} of block {c} sums to {S[j].sum()!r}")
            if K is not None:
                nnz = (S > 0).sum(axis=1)
                if np.any(nnz > K):
                    j = int(np.argmax(nnz))
                    raise ValueError(f"row {j} of block {c} has {nnz[j]} > K={K} nonzeros")


@dataclass(frozen=True, eq=False)
class RegularizationMatrix:
    """Ragged per-class vectors of non-negative regularization weights."""

    gammas: tuple

    def __getitem__(self, c):
        return self.gammas[c]

    def __len__(self):
        return len(self.gammas)

    def flat(self) -> np.ndarray:
        return np.concatenate(self.gammas) if self.gammas else np.empty(0)


@dataclass(frozen=True, eq=False)
class ProjectionModel:
    """A learned linear map, optionally preceded by PCA.

    ``w`` is the method's own matrix (``D_PCA x d`` when ``w_pca`` is set,
    otherwise ``D x d``). ``mean`` is subtracted before projecting when
    present.
    """

    w: np.ndarray
    method: str
    w_pca: Optional[np.ndarray] = None
    mean: Optional[np.ndarray] = None
    config: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.w_pca is not None and self.w_pca.shape[1] != self.w.shape[0]:
            raise ShapeMismatch(
                f"w_pca has {self.w_pca.shape[1]} columns but w has {self.w.shape[0]} rows")

    @property
    def composed(self) -> np.ndarray:
        return self.w if self.w_pca is None else self.w_pca @ self.w

    @property
    def input_dim(self) -> int:
        return self.composed.shape[0]

    @property
    def output_dim(self) -> int:
        return self.w.shape[1]

    def transform(self, X) -> np.ndarray:
        """Embed the columns of ``X``: ``composed.T @ (X - mean)``."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[0] != self.input_dim:
            raise ShapeMismatch(f"expected {self.input_dim} rows, got {X.shape[0]}")
        if self.mean is not None:
            X = X - self.mean[:, None]
        return self.composed.T @ X

    def save(self, path) -> None:
        arrays = {"w": self.w}
        if self.w_pca is not None:
            arrays["w_pca"] = self.w_pca
        if self.mean is not None:
            arrays["mean"] = self.mean
        meta = json.dumps({"method": self.method, "config": self.config}, sort_keys=True)
        np.savez(path, meta=np.array(meta), **arrays)

    @classmethod
    def load(cls, path) -> "ProjectionModel":
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            return cls(w=z["w"], method=meta["method"],
                       w_pca=z["w_pca"] if "w_pca" in z else None,
                       mean=z["mean"] if "mean" in z else None,
                       config=meta["config"])


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the alternating fit.

    ``ridge`` is relative: the absolute shift added to the total scatter is
    ``ridge * trace(S_t) / dim``.
    """

    K: int = 5
    d: int = 2
    d_pca: Optional[int] = None
    max_iters: int = 30
    rel_tol: float = 1e-6
    ridge: float = 1e-8
    include_self: bool = False
    seed: int = 0
    watch: Optional[tuple] = None

    def validate(self, ds: Optional[LabeledDataset] = None) -> "TrainConfig":
        if self.K < 2:
            raise ConfigError(f"K must be >= 2, got {self.K}")
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if self.max_iters < 1:
            raise NoIterations("max_iters must be positive")
        if self.rel_tol < 0 or self.ridge < 0:
            raise ConfigError("rel_tol and ridge must be non-negative")
        if self.d_pca is not None and self.d > self.d_pca:
            raise DimensionTooLarge(f"d={self.d} exceeds d_pca={self.d_pca}")
        if ds is None:
            return self
        if (self.d_pca or self.d) > ds.n_features:
            raise DimensionTooLarge(
                f"requested dimension {self.d_pca or self.d} exceeds feature dimension {ds.n_features}")
        n_min = int(ds.class_sizes.min())
        cap = n_min - (0 if self.include_self else 1)
        if self.K > cap:
            raise KTooLarge(
                f"K={self.K} exceeds the {cap} neighbor candidates of the smallest class")
        if self.watch is not None:
            c, j = self.watch
            if not (0 <= c < ds.n_classes and 0 <= j < ds.class_sizes[c]):
                raise ConfigError(f"watched sample {self.watch} does not exist")
        return self

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if out["watch"] is not None:
            out["watch"] = list(out["watch"])
        return out


TRACE_COLUMNS = ("iter", "J", "embed_term", "penalty_term",
                 "gamma_mean", "gamma_min", "gamma_max", "seconds")


@dataclass
class TrainTrace:
    """Per-iteration record of an alternating fit.

    ``snapshots[p]`` is the similarity row of the watched sample after
    iteration ``p`` (``snapshots[0]`` is the initialization).
    """

    rows: list = field(default_factory=list)
    watch: Optional[tuple] = None
    snapshots: list = field(default_factory=list)
    watch_heat: Optional[np.ndarray] = None
    converged: bool = False

    def __len__(self):
        return len(self.rows)

    def record(self, **values) -> None:
        self.rows.append({k: values[k] for k in TRACE_COLUMNS})

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    @property
    def objective(self) -> np.ndarray:
        return self.column("J")

    def relative_changes(self) -> np.ndarray:
        J = self.objective
        if J.size < 2:
            return np.empty(0)
        return np.abs(np.diff(J)) / np.maximum(np.abs(J[:-1]), np.finfo(float).tiny)

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.rows:
            vals = [r["iter"]] + [repr(float(r[k])) for k in TRACE_COLUMNS[1:-1]]
            vals.append(repr(float(r["seconds"])) if timing else "")
            w.writerow(vals)
        return buf.getvalue()

    def to_json(self, timing: bool = True) -> str:
        rows = [dict(r) for r in self.rows]
        if not timing:
            for r in rows:
                r["seconds"] = None
        out = {
            "rows": rows,
            "converged": self.converged,
            "watch": list(self.watch) if self.watch is not None else None,
            "snapshots": [s.tolist() for s in self.snapshots],
        }
        return json.dumps(out, indent=2)
