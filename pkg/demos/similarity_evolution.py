"""How one sample's neighbor weights change during the fit.

Writes the per-iteration objective and the watched similarity row as CSV
(the same files ``slnp trace`` produces), then prints them as a table next
to the fixed heat-kernel affinities in the input space.

    python3 demos/similarity_evolution.py [out_dir]
"""
import sys
from pathlib import Path

import numpy as np

from slnp import TrainConfig, fit, subsample_per_class, synth_two_feature_toy
from slnp.cli import emit_similarity_evolution

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

ds = synth_two_feature_toy(40, seed=1)
train, _ = subsample_per_class(ds, 10, seed=1)
res = fit(train, TrainConfig(K=3, d=1, watch=(0, 0), rel_tol=0.0, max_iters=8))
tr = res.trace

(out / "trace.csv").write_text(tr.to_csv(timing=False))
emit_similarity_evolution(tr, out / "similarity.csv")

print("iter          J     embed   penalty  gamma_mean")
for r in tr.rows:
    print(f"{r['iter']:4d} {r['J']:10.4g} {r['embed_term']:9.4g} {r['penalty_term']:9.4g} {r['gamma_mean']:11.4g}")

np.set_printoptions(precision=2, suppress=True, linewidth=100)
print("\nweights of class-0 sample 0 over its 10 classmates")
for p, row in enumerate(tr.snapshots):
    print(f"iter {p}: {row}")

# ordering by input-space affinity vs by learned weight
heat = tr.watch_heat
print("\nheat kernel (input space):", heat)
print("closest by heat kernel:   ", np.argsort(-heat)[1:4])
print("largest learned weights:  ", np.argsort(-tr.snapshots[-1])[:3])
print(f"\nCSV files written to {out}/")
