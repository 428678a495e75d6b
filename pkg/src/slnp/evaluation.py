"""1-NN evaluation, seeded experiment runs and parameter sweeps."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .alternating import fit
from .baselines import AffinityParams, lda_fit, lfda_fit, lpp_fit
from .datasets import split_indices
from .eigensolve import pca_fit
from .errors import (
    ConfigError,
    EmptyInput,
    EmptyTrainSet,
    LengthMismatch,
    ShapeMismatch,
    UnknownClass,
)
from .types import LabeledDataset, ProjectionModel, RegularizationMatrix, TrainConfig

METHODS = ("slnp", "pca", "lda", "lpp", "lfda")
REPORT_COLUMNS = ("method", "n_per_class", "K", "d_pca", "d", "seed_count",
                  "mean_rate", "std_rate", "seconds")


def knn_classify(train_emb, train_labels, query_emb,
                 leave_one_out: bool = False) -> np.ndarray:
    """1-nearest-neighbor labels; ties go to the lowest training index.

    With ``leave_one_out`` the query set must be the training set and each
    query ignores itself.
    """
    train_emb = np.atleast_2d(np.asarray(train_emb, dtype=float))
    query_emb = np.atleast_2d(np.asarray(query_emb, dtype=float))
    train_labels = np.asarray(train_labels)
    if train_emb.shape[1] == 0:
        raise EmptyTrainSet("no training samples")
    if train_emb.shape[0] != query_emb.shape[0]:
        raise ShapeMismatch(f"train dim {train_emb.shape[0]} != query dim {query_emb.shape[0]}")
    if train_labels.shape[0] != train_emb.shape[1]:
        raise LengthMismatch("train labels do not match train samples")
    D = cdist(query_emb.T, train_emb.T, "sqeuclidean")
    if leave_one_out:
        if D.shape[0] != D.shape[1]:
            raise ShapeMismatch("leave-one-out needs query == train")
        np.fill_diagonal(D, np.inf)
    return train_labels[np.argmin(D, axis=1)]


def recognition_rate(pred, truth) -> float:
    """Percentage of correct predictions."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape[0]} predictions for {truth.shape[0]} labels")
    if pred.size == 0:
        raise EmptyInput("no predictions")
    return 100.0 * np.count_nonzero(pred == truth) / pred.size


def average_gamma(R: RegularizationMatrix, class_id: int) -> float:
    """Mean regularization weight over the samples of one class."""
    if not 0 <= class_id < len(R):
        raise UnknownClass(f"class {class_id} not in 0..{len(R) - 1}")
    return float(np.mean(R[class_id]))


@dataclass
class ExperimentReport:
    method: str
    config: dict
    n_per_class: int
    rates: list
    per_class: list
    seconds: float
    seeds: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    @property
    def mean_rate(self) -> float:
        return float(np.mean(self.rates))

    @property
    def std_rate(self) -> float:
        return float(np.std(self.rates, ddof=1)) if len(self.rates) > 1 else 0.0

    def csv_row(self, timing: bool = True) -> list:
        c = self.config
        return [self.method, self.n_per_class, c.get("K"), c.get("d_pca"), c.get("d"),
                len(self.rates), repr(self.mean_rate), repr(self.std_rate),
                repr(self.seconds) if timing else ""]

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "method": self.method,
            "config": self.config,
            "n_per_class": self.n_per_class,
            "seeds": list(self.seeds),
            "rates": list(self.rates),
            "mean_rate": self.mean_rate,
            "std_rate": self.std_rate,
            "per_class_rates": list(self.per_class),
            "seconds": self.seconds if timing else None,
        }


def reports_to_csv(reports: Sequence[ExperimentReport], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row(timing))
    return buf.getvalue()


def reports_to_json(reports: Sequence[ExperimentReport], timing: bool = True) -> str:
    return json.dumps([r.to_dict(timing) for r in reports], indent=2)


def fit_method(train: LabeledDataset, method: str, cfg: TrainConfig,
               affinity: Optional[AffinityParams] = None):
    """Fit one method on ``train``; returns ``(model, trace_or_None)``.

    Baselines share the PCA pre-reduction of ``cfg.d_pca``. LDA keeps at
    most ``C - 1`` directions, the rank of its between-class scatter.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method == "slnp":
        res = fit(train, cfg)
        return res.model, res.trace
    if method == "pca":
        return pca_fit(train, cfg.d), None
    pca = None
    work = train
    if cfg.d_pca is not None:
        pca = pca_fit(train, cfg.d_pca)
        work = train.with_features(pca.transform(train.features))
    ap = affinity or AffinityParams()
    if method == "lda":
        inner = lda_fit(work, min(cfg.d, train.n_classes - 1), ridge=cfg.ridge)
    elif method == "lpp":
        inner = lpp_fit(work, cfg.d, ap, ridge=cfg.ridge)
    else:
        inner = lfda_fit(work, cfg.d, ap, ridge=cfg.ridge)
    if pca is None:
        return inner, None
    return dataclasses.replace(inner, w_pca=pca.w, mean=pca.mean), None


def run_experiment(ds: LabeledDataset, method: str, cfg: TrainConfig,
                   n_per_class: int, seeds: Sequence[int],
                   affinity: Optional[AffinityParams] = None) -> ExperimentReport:
    """Split, fit, embed and classify once per seed; aggregate the rates."""
    if not seeds:
        raise ConfigError("at least one seed is required")
    t0 = time.perf_counter()
    rates, per_class, traces = [], [], []
    for seed in seeds:
        tr_idx, te_idx = split_indices(ds, n_per_class, seed)
        train, test = ds.subset(tr_idx), ds.subset(te_idx)
        try:
            model, trace = fit_method(train, method, dataclasses.replace(cfg, seed=seed), affinity)
        except Exception as e:
            e.args = (f"seed {seed}: {e.args[0] if e.args else e}",) + e.args[1:]
            raise
        pred = knn_classify(model.transform(train.features), train.labels,
                            model.transform(test.features))
        rates.append(recognition_rate(pred, test.labels))
        pc = [recognition_rate(pred[test.labels == c], test.labels[test.labels == c])
              if np.any(test.labels == c) else float("nan")
              for c in range(ds.n_classes)]
        per_class.append(pc)
        traces.append(trace)
    pcm = np.nanmean(np.array(per_class, dtype=float), axis=0) if per_class else []
    conf = cfg.to_dict()
    if method == "lda":
        conf["d"] = min(cfg.d, ds.n_classes - 1)
    return ExperimentReport(method, conf, n_per_class, rates,
                            [float(v) for v in pcm], time.perf_counter() - t0,
                            seeds=list(seeds), traces=traces)


def sweep(ds: LabeledDataset, method: str, cfg_template: TrainConfig, axis: str,
          values: Sequence, seeds: Sequence[int], n_per_class: Optional[int] = None,
          affinity: Optional[AffinityParams] = None) -> list[ExperimentReport]:
    """One report per value of ``axis`` (``"K"``, ``"d"`` or
    ``"n_per_class"``), reusing the same seeds so splits are paired."""
    if not values:
        raise ConfigError("sweep needs at least one value")
    if axis not in ("K", "d", "n_per_class"):
        raise ConfigError(f"unknown sweep axis {axis!r}")
    out = []
    for v in values:
        if axis == "n_per_class":
            cfg, n = cfg_template, int(v)
        else:
            cfg, n = dataclasses.replace(cfg_template, **{axis: int(v)}), n_per_class
        if n is None:
            raise ConfigError("n_per_class is required")
        out.append(run_experiment(ds, method, cfg, n, seeds, affinity))
    return out
