"""Scratch: ablation-criterion calibration over bias/correlated noise."""

import sys
import time

import numpy as np

from curvo import synthdata as sd
from curvo import trainer as tr


def patched_walker(amp, sigma, speed_sigma=0.25):
    def make():
        return sd.MotionModel(
            dt=0.1,
            speed=sd.OuParams(mean=1.4, reversion=1.0, sigma=speed_sigma),
            roll_rate=sd.OuParams(reversion=3.0, sigma=0.05),
            pitch_rate=sd.OuParams(reversion=3.0, sigma=0.05),
            yaw_rate=sd.OuParams(reversion=1.5, sigma=sigma),
            yaw_oscillation_amp=amp,
            yaw_oscillation_period=4.0,
            pitch_clamp=0.35,
            roll_clamp=0.25,
        )
    return make

seeds = list(range(6))

base = dict(
    n_sequences=5, seq_length=200, preset="walker",
    feature_dim=8, nuisance_dim=2,
    lstm_sizes=(16, 16), max_epochs_per_stage=8, patience=3,
    subseq_count=10, subseq_min=10, subseq_max=20,
    zeta=5.0, window=2,
)

grid = [
    # (tag, extra config, amp, yaw_sigma)
    ("E:bias05",      dict(noise_sigma=0.03, bias_sigma=0.05), 1.2, 0.4),
    ("F:rho09",       dict(noise_sigma=0.05, noise_rho=0.9), 1.2, 0.4),
    ("G:bias_rho",    dict(noise_sigma=0.04, noise_rho=0.8, bias_sigma=0.04), 1.2, 0.4),
]

which = sys.argv[1:] or [g[0] for g in grid]

for tag, extra, amp, ys in grid:
    if tag not in which:
        continue
    sd.MOTION_PRESETS["walker"] = patched_walker(amp, ys)
    cfg = tr.RunConfig(**base, **extra)
    t0 = time.perf_counter()
    rep = tr.ablate(cfg, seeds=seeds, holdout_count=5)
    cur_wins = anti_worst = 0
    for seed in seeds:
        by_mode = {row.mode: row for row in rep.rows if row.seed == seed}
        finals = {m: by_mode[m].final().segment_trans_pct for m in by_mode}
        cur_wins += finals["curriculum"] <= finals["fixed-bounded"]
        firsts = {m: by_mode[m].stages[0].val_relative_loss for m in by_mode}
        anti_worst += max(firsts, key=firsts.get) == "anti-curriculum"
        print(f"  [{tag}] seed {seed} finals: "
              + " ".join(f"{m}:{v:.2f}" for m, v in finals.items())
              + "  first-rel: " + " ".join(f"{m}:{v:.5f}" for m, v in firsts.items()),
              flush=True)
    print(f"[{tag}] RESULT cur<=fb {cur_wins}/{len(seeds)} anti_first_worst "
          f"{anti_worst}/{len(seeds)} ({time.perf_counter()-t0:.0f}s)", flush=True)
