"""Command-line front end: data generation, training, comparisons, evaluation.

Subcommands: gen-data, train, ablate, alpha-sweep, eval, plot. Run settings
come from an INI-style config file of flat ``key = value`` sections (see
CONFIG_SCHEMA below); any matching command-line flag overrides the file.
Every run writes a ``manifest.txt`` capturing the fully resolved
configuration, the seed, and the tool version, so a run is reproducible from
its manifest alone.

Exit codes: 0 success, 1 usage or config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from . import evaluation as ev
from . import geometry as geo
from . import svgplot
from . import synthdata as sd
from . import trainer as tr


class UsageError(ValueError):
    """Bad flags or config content; maps to exit code 1."""


class LineCountMismatchError(ValueError):
    pass


def _parse_int(v):
    return int(v)


def _parse_float(v):
    return float(v)


def _parse_str(v):
    return str(v)


def _parse_optional_int(v):
    return None if v.strip() == "" else int(v)


def _parse_optional_str(v):
    return None if v.strip() == "" else str(v)


def _parse_int_tuple(v):
    return tuple(int(p) for p in str(v).split(",") if p.strip())


def _parse_float_tuple(v):
    return tuple(float(p) for p in str(v).split(",") if p.strip())


# section -> key -> (RunConfig field, parser)
CONFIG_SCHEMA = {
    "data": {
        "dataset_dir": ("dataset_dir", _parse_optional_str),
        "preset": ("preset", _parse_str),
        "sequences": ("n_sequences", _parse_int),
        "length": ("seq_length", _parse_int),
        "feature_dim": ("feature_dim", _parse_int),
        "nuisance_dim": ("nuisance_dim", _parse_int),
        "noise_sigma": ("noise_sigma", _parse_float),
        "noise_rho": ("noise_rho", _parse_float),
        "bias_sigma": ("bias_sigma", _parse_float),
    },
    "model": {
        "lstm_sizes": ("lstm_sizes", _parse_int_tuple),
        "head_hidden": ("head_hidden", _parse_optional_int),
        "dropout": ("dropout", _parse_float),
    },
    "objective": {
        "mode": ("mode", _parse_str),
        "alphas": ("alphas", _parse_float_tuple),
        "delta": ("delta", _parse_float),
        "zeta": ("zeta", _parse_float),
        "window": ("window", _parse_int),
    },
    "training": {
        "learning_rate": ("learning_rate", _parse_float),
        "grad_clip": ("grad_clip", _parse_float),
        "max_epochs_per_stage": ("max_epochs_per_stage", _parse_int),
        "patience": ("patience", _parse_int),
        "min_delta": ("min_delta", _parse_float),
        "subseq_count": ("subseq_count", _parse_int),
        "subseq_min": ("subseq_min", _parse_int),
        "subseq_max": ("subseq_max", _parse_int),
        "val_split": ("val_split", _parse_float),
        "seed": ("seed", _parse_int),
    },
}


def load_run_config(path, overrides=None) -> tr.RunConfig:
    """Parse a config file into a RunConfig, reporting every offending key."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise UsageError(f"config file not found: {path}")
    errors = []
    values = {}
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            spec = CONFIG_SCHEMA[section].get(key)
            if spec is None:
                errors.append(f"unknown key [{section}] {key}")
                continue
            field_name, convert = spec
            try:
                values[field_name] = convert(raw)
            except ValueError:
                errors.append(f"bad value for [{section}] {key}: {raw!r}")
    if errors:
        raise UsageError("config errors:\n  " + "\n  ".join(errors))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return tr.RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"config errors:\n  {exc}") from None


def write_manifest(out_dir: Path, command: str, config: tr.RunConfig | None, extra=None):
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"tool = curvo {__version__}", f"command = {command}"]
    if config is not None:
        for f in fields(tr.RunConfig):
            value = getattr(config, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            lines.append(f"{f.name} = {value}")
    for key in sorted(extra or {}):
        lines.append(f"{key} = {(extra or {})[key]}")
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n")


# --- subcommands ---------------------------------------------------------------


def cmd_gen_data(args) -> int:
    out = Path(args.out)
    motion = sd.MOTION_PRESETS[args.preset]()
    seed_rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    feature_model = sd.FeatureModel.seeded(
        args.feature_dim,
        seed=int(seed_rng.integers(2**31)),
        noise_sigma=args.noise_sigma,
        nuisance_dim=args.nuisance_dim,
        nuisance_sigma=args.noise_sigma * 5.0,
    )
    sequences = [
        sd.generate(motion, feature_model, length=args.length,
                    seed=int(seed_rng.integers(2**31)))
        for _ in range(args.sequences)
    ]
    meta = {
        "preset": args.preset,
        "master_seed": args.seed,
        "length": args.length,
        "feature_dim": args.feature_dim,
        "nuisance_dim": args.nuisance_dim,
        "noise_sigma": args.noise_sigma,
    }
    sd.save_dataset(out, sequences, meta)
    write_manifest(out, "gen-data", None, extra=meta | {"sequences": args.sequences})
    print(f"wrote {args.sequences} sequences to {out}")
    return 0


def cmd_train(args) -> int:
    config = load_run_config(args.config, overrides={"seed": args.seed, "out_dir": str(args.out)})
    out = Path(args.out)
    write_manifest(out, "train", config)
    store, runlog = tr.train(config)
    last = runlog.records[-1]
    print(f"finished after {last.epoch} epochs; final validation loss {last.val_loss:.6g}")
    print(f"artifacts in {out}")
    return 0


def cmd_ablate(args) -> int:
    config = load_run_config(args.config, overrides={"seed": args.seed})
    seeds = _parse_int_tuple(args.seeds)
    if len(seeds) < 2:
        raise UsageError("--seeds needs at least two comma-separated values")
    out = Path(args.out)
    write_manifest(out, "ablate", config, extra={"seeds": args.seeds})
    report = tr.ablate(config, seeds=seeds)
    tr.write_ablation_csv(report, out / "ablation.csv")
    for metric, path in (("trans", "ablation_translation.svg"), ("rot", "ablation_rotation.svg")):
        svgplot.save_plot(_ablation_svg(report, metric), out / path)
    for mode in report.modes():
        rows = report.rows_for(mode)
        finals = [row.final().segment_trans_pct for row in rows]
        print(f"{mode:18s} final segment translation: {np.mean(finals):7.2f}% "
              f"(over {len(rows)} seeds)")
    print(f"artifacts in {out}")
    return 0


def cmd_alpha_sweep(args) -> int:
    config = load_run_config(args.config, overrides={"seed": args.seed})
    alphas = _parse_float_tuple(args.alphas)
    out = Path(args.out)
    write_manifest(out, "alpha-sweep", config,
                   extra={"alphas": args.alphas, "epochs": args.epochs})
    report = tr.alpha_sweep(config, alphas=alphas, epochs=args.epochs)
    tr.write_sweep_csv(report, out / "sweep.csv")
    svgplot.save_plot(_sweep_svg(report), out / "sweep.svg")
    for row in report.rows:
        print(f"alpha {row.alpha:4.2f}: normalized trans {row.trans_norm:.3f} "
              f"rot {row.rot_norm:.3f}")
    print(f"artifacts in {out}")
    return 0


def cmd_eval(args) -> int:
    gt = geo.load_trajectory_kitti(args.gt)
    est = geo.load_trajectory_kitti(args.est)
    if len(gt) != len(est):
        raise LineCountMismatchError(
            f"pose files differ in length: {len(gt)} ({args.gt}) vs {len(est)} ({args.est})"
        )
    lengths = _parse_float_tuple(args.segments)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    segment = ev.segment_errors(gt, est, lengths)
    rpe_report = ev.rpe(gt, est)
    ate_report = ev.ate(gt, est)

    ev.write_segment_csv(segment, out / "segment_errors.csv")
    ev.write_rpe_csv(rpe_report, out / "rpe.csv")
    ev.write_ate_csv(ate_report, out / "ate.csv", out / "ate_cdf.csv")

    svgplot.save_plot(
        svgplot.line_plot(
            [
                ("translation [% of length]", segment.lengths, segment.trans_err_pct),
                ("rotation [deg/m]", segment.lengths, segment.rot_err_deg_per_m),
            ],
            title="segment errors vs path length",
            xlabel="segment length [m]",
            ylabel="error",
        ),
        out / "segment_errors.svg",
    )
    svgplot.save_plot(
        svgplot.trajectory_plot(
            [("ground truth", gt.positions()[:, :2]), ("estimate", est.positions()[:, :2])]
        ),
        out / "trajectory.svg",
    )
    svgplot.save_plot(
        svgplot.line_plot(
            [("absolute position error", ate_report.cdf_values, ate_report.cdf_fractions)],
            title="CDF of absolute position errors",
            xlabel="error [m]",
            ylabel="fraction of frames",
        ),
        out / "ate_cdf.svg",
    )
    write_manifest(out, "eval", None,
                   extra={"gt": args.gt, "est": args.est, "segments": args.segments})
    print(f"rpe: translation {rpe_report.trans_err_pct:.3f}% "
          f"rotation {rpe_report.rot_err_deg:.5f} deg/frame "
          f"({rpe_report.skipped_frames} degenerate frames skipped)")
    print(f"ate rmse: {ate_report.rmse:.4f} m")
    print(f"reports in {out}")
    return 0


def cmd_plot(args) -> int:
    source = Path(args.runlog if args.runlog else args.report)
    if not source.exists():
        raise UsageError(f"input file not found: {source}")
    with open(source) as f:
        header = f.readline().strip()
        rows = [line.strip().split(",") for line in f if line.strip()]
    if not rows:
        raise ValueError(f"{source}: no data rows to plot")
    svg = _dispatch_plot(header, rows, metric=args.metric)
    svgplot.save_plot(svg, args.out)
    print(f"wrote {args.out}")
    return 0


def _dispatch_plot(header: str, rows, metric="trans") -> str:
    columns = header.split(",")
    data = {name: [row[i] for row in rows] for i, name in enumerate(columns)}
    if header.startswith("epoch,stage,alpha,train_loss,val_loss"):
        epochs = [int(v) for v in data["epoch"]]
        return svgplot.line_plot(
            [
                ("train loss", epochs, [float(v) for v in data["train_loss"]]),
                ("validation loss", epochs, [float(v) for v in data["val_loss"]]),
            ],
            title="training curve",
            xlabel="epoch",
            ylabel="loss (per step)",
        )
    if header.startswith("length_m,"):
        lengths = [float(v) for v in data["length_m"]]
        return svgplot.line_plot(
            [
                ("translation [% of length]", lengths,
                 [float(v) for v in data["translation_error_pct"]]),
                ("rotation [deg/m]", lengths,
                 [float(v) for v in data["rotation_error_deg_per_m"]]),
            ],
            title="segment errors vs path length",
            xlabel="segment length [m]",
            ylabel="error",
        )
    if header.startswith("error_m,fraction"):
        return svgplot.line_plot(
            [("absolute position error", [float(v) for v in data["error_m"]],
              [float(v) for v in data["fraction"]])],
            title="CDF of absolute position errors",
            xlabel="error [m]",
            ylabel="fraction of frames",
        )
    if header.startswith("frame,position_error_m"):
        return svgplot.line_plot(
            [("absolute position error", [int(v) for v in data["frame"]],
              [float(v) for v in data["position_error_m"]])],
            title="absolute position error per frame",
            xlabel="frame",
            ylabel="error [m]",
        )
    if header.startswith("mode,seed,stage,"):
        report = _ablation_from_rows(rows)
        return _ablation_svg(report, metric)
    if header.startswith("alpha,"):
        report = tr.SweepReport(
            rows=[
                tr.SweepRow(*(float(v) for v in row))
                for row in rows
            ]
        )
        return _sweep_svg(report)
    raise ValueError(f"unrecognized report header: {header}")


def _ablation_from_rows(rows) -> tr.AblationReport:
    grouped: dict[tuple[str, int], list[tr.StageMetrics]] = {}
    for mode, seed, stage, rel, seg_t, seg_r in rows:
        grouped.setdefault((mode, int(seed)), []).append(
            tr.StageMetrics(int(stage), float(rel), float(seg_t), float(seg_r))
        )
    report = tr.AblationReport()
    for (mode, seed), stages in grouped.items():
        report.rows.append(tr.AblationRow(mode=mode, seed=seed,
                                          stages=tuple(sorted(stages, key=lambda s: s.stage))))
    return report


def _ablation_svg(report: tr.AblationReport, metric: str) -> str:
    label, attr = {
        "trans": ("segment translation error [%]", "segment_trans_pct"),
        "rot": ("segment rotation error [deg/m]", "segment_rot_deg_per_m"),
    }[metric]
    series = []
    for mode in report.modes():
        rows = report.rows_for(mode)
        stages = sorted({sm.stage for row in rows for sm in row.stages})
        means = []
        for stage in stages:
            values = [
                getattr(sm, attr) for row in rows for sm in row.stages if sm.stage == stage
            ]
            means.append(float(np.mean(values)))
        series.append((mode, [s + 1 for s in stages], means))
    return svgplot.line_plot(
        series, title="objective schedules compared", xlabel="training stage", ylabel=label
    )


def _sweep_svg(report: tr.SweepReport) -> str:
    alphas = [row.alpha for row in report.rows]
    return svgplot.line_plot(
        [
            ("translation (normalized)", alphas, [row.trans_norm for row in report.rows]),
            ("rotation (normalized)", alphas, [row.rot_norm for row in report.rows]),
        ],
        title="first-stage error vs alpha",
        xlabel="alpha",
        ylabel="normalized error",
    )


# --- argument parsing ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curvo", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"curvo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset directory")
    p.add_argument("--preset", choices=sorted(sd.MOTION_PRESETS), default="walker")
    p.add_argument("--sequences", type=int, default=5)
    p.add_argument("--length", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--feature-dim", dest="feature_dim", type=int, default=8)
    p.add_argument("--nuisance-dim", dest="nuisance_dim", type=int, default=2)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=0.02)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="run the staged training loop")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ablate", help="compare objective schedules on shared data")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", default="0,1", help="comma-separated seeds")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("alpha-sweep", help="first-stage training at fixed alphas")
    p.add_argument("--config", required=True)
    p.add_argument("--alphas", default="0,0.25,0.5,0.75,1")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_alpha_sweep)

    p = sub.add_parser("eval", help="compare two pose files")
    p.add_argument("--gt", required=True)
    p.add_argument("--est", required=True)
    p.add_argument("--segments", default="5,10,15,20,25,30,35,40")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="render a report CSV as SVG")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--runlog")
    group.add_argument("--report")
    p.add_argument("--metric", choices=("trans", "rot"), default="trans",
                   help="series for ablation reports")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"curvo: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"curvo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
