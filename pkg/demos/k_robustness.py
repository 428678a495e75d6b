"""Recognition rate as the neighbor count K varies.

Uses MNIST from $SLNP_DATA_DIR/mnist when present, otherwise the
two-feature toy problem.

    python3 demos/k_robustness.py
"""
from slnp import TrainConfig, load_idx, sweep, synth_two_feature_toy
from slnp.datasets import data_root, find_idx_pair, random_subset

try:
    ds = random_subset(load_idx(*find_idx_pair(data_root() / "mnist"), pool=2), 6000, seed=0)
    cfg, name = TrainConfig(K=6, d=18, d_pca=32), "MNIST subset"
except (FileNotFoundError, OSError):
    ds = synth_two_feature_toy(40, seed=0)
    cfg, name = TrainConfig(K=2, d=1), "toy problem"

reps = sweep(ds, "slnp", cfg, "K", range(2, 10), seeds=[0, 1, 2], n_per_class=10)
print(f"{name}, 10 training samples per class, 3 seeds")
for r in reps:
    print(f"  K={r.config['K']}  {r.mean_rate:6.2f} +- {r.std_rate:4.2f}  " + "#" * int(r.mean_rate / 2))
rates = [r.mean_rate for r in reps]
print(f"spread {max(rates) - min(rates):.2f} points")
