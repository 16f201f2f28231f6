"""Scratch: focused grid over sweep knobs (not part of the package)."""

import itertools
import sys
import time

from curvo import synthdata as sd
from curvo import trainer as tr
from calibrate import patched_walker

seeds = range(6)

base = dict(
    n_sequences=5, seq_length=200, preset="walker",
    feature_dim=8, nuisance_dim=2,
    lstm_sizes=(16, 16), max_epochs_per_stage=8, patience=3,
    subseq_count=10, subseq_min=10, subseq_max=20,
)

grid = [
    # (tag, noise, window, lr, sweep_epochs, amp, yaw_sigma, zeta)
    ("n08_w3_lr1_e8",  0.08, 3, 1e-3, 8,  1.2, 0.4, 5.0),
    ("n08_w3_lr3_e8",  0.08, 3, 3e-3, 8,  1.2, 0.4, 5.0),
    ("n03_w3_lr3_e12", 0.03, 3, 3e-3, 12, 1.2, 0.4, 5.0),
    ("n08_w2_lr1_e8",  0.08, 2, 1e-3, 8,  0.8, 0.25, 10.0),
]

which = sys.argv[1:] or [g[0] for g in grid]

for tag, noise, window, lr, epochs, amp, ys, zeta in grid:
    if tag not in which:
        continue
    sd.MOTION_PRESETS["walker"] = patched_walker(amp, ys)
    t0 = time.perf_counter()
    hits = 0
    for seed in seeds:
        cfg = tr.RunConfig(**base, noise_sigma=noise, window=window,
                           learning_rate=lr, zeta=zeta, seed=seed)
        sw = tr.alpha_sweep(cfg, epochs=epochs)
        worst = max(sw.rows, key=lambda r: r.trans_norm)
        hits += worst.alpha == 0.0
        print(f"  [{tag}] seed {seed}: "
              + " ".join(f"{r.alpha}:{r.trans_norm:.3f}" for r in sw.rows), flush=True)
    print(f"[{tag}] alpha0_worst {hits}/{len(list(seeds))} ({time.perf_counter()-t0:.0f}s)",
          flush=True)
