"""SLNP against the classical baselines on a 6,000-image MNIST subset.

Needs the IDX files in $SLNP_DATA_DIR/mnist (train-images-idx3-ubyte and
train-labels-idx1-ubyte, optionally gzipped). Images are pooled 2x2 to
14x14, then 5 and 10 training images per digit are drawn per seed.

    SLNP_DATA_DIR=~/data python3 demos/mnist_compare.py [n_seeds]
"""
import sys
import time

from slnp import TrainConfig, load_idx, run_experiment
from slnp.datasets import data_root, find_idx_pair, random_subset

n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5
ds = random_subset(load_idx(*find_idx_pair(data_root() / "mnist"), pool=2), 6000, seed=0)
print(f"{ds.n_samples} images, {ds.n_features} pixels, {ds.n_classes} classes")

for n in (5, 10):
    cfg = TrainConfig(K=min(6, n - 1), d=18, d_pca=32)
    print(f"\n{n} training images per class, K={cfg.K}, d_pca=32, d=18 (LDA: 9)")
    for method in ("slnp", "lda", "lfda", "lpp", "pca"):
        t0 = time.perf_counter()
        rep = run_experiment(ds, method, cfg, n, range(n_seeds))
        print(f"  {method:5s} {rep.mean_rate:6.2f} +- {rep.std_rate:4.2f}   ({time.perf_counter() - t0:.1f} s)")
