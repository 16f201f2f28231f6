"""Scratch calibration of the experiment configs (not part of the package)."""

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


def evaluate(tag, cfg, seeds, sweep_epochs, amp, yaw_sigma):
    sd.MOTION_PRESETS["walker"] = patched_walker(amp, yaw_sigma)
    t0 = time.perf_counter()
    sweep_worst_alpha0 = 0
    for seed in seeds:
        sw = tr.alpha_sweep(tr.RunConfig(**{**cfg.__dict__, "seed": seed}), epochs=sweep_epochs)
        worst = max(sw.rows, key=lambda r: r.trans_norm)
        sweep_worst_alpha0 += worst.alpha == 0.0
        print(f"  [{tag}] seed {seed} sweep trans: "
              + " ".join(f"{r.alpha}:{r.trans_norm:.3f}" for r in sw.rows), flush=True)
    rep = tr.ablate(cfg, seeds=seeds)
    cur_wins = anti_worst = 0
    for seed in seeds:
        by_mode = {row.mode: row for row in rep.rows if row.seed == seed}
        cur_final = by_mode["curriculum"].final().segment_trans_pct
        fb_final = by_mode["fixed-bounded"].final().segment_trans_pct
        cur_wins += cur_final <= fb_final
        firsts = {m: by_mode[m].stages[0].val_relative_loss for m in by_mode}
        anti_worst += max(firsts, key=firsts.get) == "anti-curriculum"
        print(f"  [{tag}] seed {seed} final seg: cur={cur_final:.2f} fb={fb_final:.2f} "
              f"first rel: " + " ".join(f"{m}:{v:.5f}" for m, v in firsts.items()), flush=True)
    n = len(seeds)
    print(f"[{tag}] RESULT sweep_alpha0_worst {sweep_worst_alpha0}/{n}  "
          f"curriculum<=fixed_bounded {cur_wins}/{n}  anti_first_worst {anti_worst}/{n}  "
          f"({time.perf_counter()-t0:.0f}s)", flush=True)


seeds = [0, 1, 2, 3]

base = dict(
    n_sequences=5, seq_length=200, preset="walker",
    feature_dim=8, nuisance_dim=2,
    lstm_sizes=(16, 16), max_epochs_per_stage=8, patience=3,
    subseq_count=10, subseq_min=10, subseq_max=20,
)

which = sys.argv[1] if len(sys.argv) > 1 else "all"

if which in ("all", "B"):
    evaluate("B:w3_strong_yaw", tr.RunConfig(**base, noise_sigma=0.03, zeta=5.0, window=3),
             seeds, sweep_epochs=6, amp=1.2, yaw_sigma=0.4)
if which in ("all", "C"):
    evaluate("C:w3_zeta1", tr.RunConfig(**base, noise_sigma=0.05, zeta=1.0, window=3),
             seeds, sweep_epochs=6, amp=1.2, yaw_sigma=0.4)
if which in ("all", "D"):
    evaluate("D:w2_base_more_noise", tr.RunConfig(**base, noise_sigma=0.05, zeta=10.0, window=2),
             seeds, sweep_epochs=6, amp=0.8, yaw_sigma=0.25)
