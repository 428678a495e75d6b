"""Two features, one of them pure noise.

Neighbors found in the raw space are mostly wrong here, and so is the
first principal axis. The learned projection ignores the noisy feature.

    python3 demos/toy_neighbors.py
"""
import numpy as np

from slnp import TrainConfig, fit, pca_fit, subsample_per_class, synth_two_feature_toy
from slnp.evaluation import knn_classify, recognition_rate

ds = synth_two_feature_toy(40, noise_scale=10.0, seed=0)
train, test = subsample_per_class(ds, 10, seed=0)

# spread of each feature: the nuisance one dominates
print("feature std:", np.round(train.features.std(axis=1), 2))

# raw-space 1-NN
pred = knn_classify(train.features, train.labels, test.features)
print(f"raw 2-D 1-NN        {recognition_rate(pred, test.labels):6.1f}%")

# PCA keeps the high-variance (noisy) direction
pca = pca_fit(train, 1)
pred = knn_classify(pca.transform(train.features), train.labels, pca.transform(test.features))
print(f"PCA d=1             {recognition_rate(pred, test.labels):6.1f}%   axis {np.round(pca.w[:, 0], 3)}")

res = fit(train, TrainConfig(K=2, d=1))
m = res.model
pred = knn_classify(m.transform(train.features), train.labels, m.transform(test.features))
w = m.w[:, 0] / np.linalg.norm(m.w[:, 0])
print(f"SLNP d=1, K=2       {recognition_rate(pred, test.labels):6.1f}%   axis {np.round(w, 3)}")
print(f"converged after {len(res.trace)} iterations, J = {res.trace.objective[-1]:.3e}")

# which classmates does sample 0 lean on, before and after?
Xc = train.class_features(0)
raw_d = ((Xc - Xc[:, :1]) ** 2).sum(axis=0)
print("raw nearest classmates of sample 0:    ", np.argsort(raw_d)[1:3])
print("learned neighbors (nonzero weights):   ", np.flatnonzero(res.similarity[0][0]))
