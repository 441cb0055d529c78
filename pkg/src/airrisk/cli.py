"""Batch CLI over every pipeline stage.

Machine-readable outputs always go to files; stdout carries human summaries.
Exit codes are a stable contract: 0 success, 2 input error, 3 analytic
degeneracy (no valid delay, failed gradient check), 4 range error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date
from pathlib import Path

import numpy as np

from . import correlation, grids, lstm, risk, series
from .errors import (
    AirriskError,
    InsufficientOverlapError,
    NoValidDelayError,
    UndefinedCorrelationError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ANALYTIC = 3
EXIT_RANGE = 4

BUNDLE_FORMAT_VERSION = 1


def _parse_bbox(text: str) -> grids.BBox:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("bbox must be 'lat_min,lat_max,lon_min,lon_max'")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bbox has non-numeric part: {text!r}") from exc
    return grids.BBox(lat_min=values[0], lat_max=values[1], lon_min=values[2], lon_max=values[3])


def _parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad date {text!r}, expected YYYY-MM-DD") from exc


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def cmd_ingest(args: argparse.Namespace) -> int:
    grid_series = grids.load_grid_series(args.raster)
    cases = series.load_case_series(args.cases)
    mask = grids.load_region_mask(args.mask)
    if mask.shape != grid_series.shape:
        print(
            f"error: mask shape {mask.shape} does not match raster shape {grid_series.shape}",
            file=sys.stderr,
        )
        return EXIT_INPUT
    bundle = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "raster": grids.grid_series_to_dict(grid_series),
        "cases": [[d.isoformat(), int(v)] for d, v in cases.points],
        "mask": grids.region_mask_to_dict(mask),
    }
    Path(args.out).write_text(json.dumps(bundle) + "\n")
    print(f"bundle written to {args.out}: {len(grid_series)} frames, "
          f"{len(cases)} case days, region {mask.name!r}")
    return EXIT_OK


def _load_bundle(path: str) -> tuple[grids.GridSeries, series.ScalarSeries, grids.RegionMask]:
    doc = json.loads(Path(path).read_text())
    grid_series = grids.grid_series_from_dict(doc["raster"], origin=path)
    mask = grids.region_mask_from_dict(doc["mask"], origin=path)
    points = [(date.fromisoformat(d), float(v)) for d, v in doc["cases"]]
    cases = series.ScalarSeries(
        dates=tuple(p[0] for p in points),
        values=tuple(p[1] for p in points),
        kind="new_cases",
    )
    return grid_series, cases, mask


def cmd_correlate(args: argparse.Namespace) -> int:
    grid_series, cases, mask = _load_bundle(args.bundle)
    pollutant = grids.grid_series_to_regional_series(grid_series, mask)
    anchor = args.start_date or min(pollutant.dates[0], cases.dates[0])
    pol_buckets = series.bucket_mean(pollutant, args.window, anchor)
    case_buckets = series.bucket_mean(cases, args.window, anchor)
    if args.interpolate == "linear":
        pol_buckets = series.interpolate_gaps(pol_buckets)
        case_buckets = series.interpolate_gaps(case_buckets)
    pair = series.align(pol_buckets, case_buckets)
    report = correlation.lag_sweep(pair, args.max_delay, args.min_overlap,
                                   region_name=mask.name)
    correlation.write_report(report, args.report)

    if args.scatter_dir:
        scatter_dir = Path(args.scatter_dir)
        scatter_dir.mkdir(parents=True, exist_ok=True)
        for entry in report.entries:
            scatter = correlation.scatter_series(pair, entry.delay_units, args.min_overlap)
            scatter.write_csv(scatter_dir / f"scatter_delay_{entry.delay_units:02d}.csv")

    print(f"region: {report.region_name}  window: {report.window_days} days")
    print("delay  pcc      n_pairs")
    for entry in report.entries:
        print(f"{entry.delay_units:<6d} {entry.pcc:<8.4f} {entry.n_pairs}")
    for delay, reason in report.skipped:
        print(f"{delay:<6d} skipped: {reason}")
    print(f"best delay: {report.best_delay_units} units "
          f"({report.best_delay_days} days), pcc {report.best_pcc:.4f}")
    return EXIT_OK


def _load_training_file(path: str) -> list[tuple[lstm.FeatureMatrix, lstm.TargetMatrix]]:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict) and "samples" in doc:
        return [
            (lstm.feature_matrix_from_dict(s["features"], origin=path),
             lstm.target_matrix_from_dict(s["targets"], origin=path))
            for s in doc["samples"]
        ]
    raise AirriskError(f"{path}: expected an object with a 'samples' list")


def cmd_train(args: argparse.Namespace) -> int:
    if args.dataset:
        dataset = _load_training_file(args.dataset)
    else:
        features = lstm.feature_matrix_from_dict(
            json.loads(Path(args.features).read_text()), origin=args.features)
        targets = lstm.target_matrix_from_dict(
            json.loads(Path(args.targets).read_text()), origin=args.targets)
        dataset = [(features, targets)]

    cfg = lstm.TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                           gradient_clip=args.clip, seed=args.seed)
    model = lstm.init_model(n_in=dataset[0][0].n_sources, n_hidden=args.hidden,
                            n_out=dataset[0][1].p_dims, seed=args.seed)
    trained, record = lstm.train(model, dataset, cfg)
    lstm.save_model(trained, args.model_out)
    if args.loss_csv:
        record.write_csv(args.loss_csv)
    print(f"trained {cfg.epochs} epochs: loss {record.losses[0]:.6g} -> {record.losses[-1]:.6g}")
    print(f"model written to {args.model_out}")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    model = lstm.load_model(args.model)
    features = lstm.feature_matrix_from_dict(
        json.loads(Path(args.features).read_text()), origin=args.features)
    prediction = lstm.predict(model, features)
    Path(args.out).write_text(json.dumps(lstm.target_matrix_to_dict(prediction)) + "\n")
    print(f"predictions ({prediction.p_dims}x{prediction.q_steps}) written to {args.out}")
    return EXIT_OK


def cmd_riskmap(args: argparse.Namespace) -> int:
    model = lstm.load_model(args.model)
    features = lstm.feature_matrix_from_dict(
        json.loads(Path(args.features).read_text()), origin=args.features)
    thresholds = risk.RiskThresholds(low_upper=args.low, medium_upper=args.medium)
    spec = risk.GridSpec(rows=args.rows, cols=args.cols, bbox=args.bbox,
                         resolution=args.resolution, start_date=args.start_date,
                         step_days=args.step_days)
    prediction = lstm.predict(model, features)
    maps = risk.risk_maps_from_prediction(prediction, spec, thresholds)

    if args.t is not None and not 0 <= args.t < len(maps):
        print(f"error: t={args.t} outside 0..{len(maps) - 1}", file=sys.stderr)
        return EXIT_RANGE
    wanted = range(len(maps)) if args.t is None else [args.t]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = "json" if args.format == "json" else "pgm"
    for t in wanted:
        payload = risk.export_risk_map(maps[t], args.format)
        (out_dir / f"riskmap_{t:03d}.{suffix}").write_bytes(payload)
    print(f"wrote {len(list(wanted))} {args.format} map(s) to {out_dir}")
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    model = lstm.init_model(args.n_in, args.n_hidden, args.n_out, seed=args.seed)
    rng = np.random.default_rng(args.seed + 1)
    features = lstm.FeatureMatrix(
        data=rng.normal(size=(args.n_in, args.steps)),
        source_labels=tuple(f"x{k}" for k in range(args.n_in)),
    )
    targets = lstm.TargetMatrix(data=rng.normal(size=(args.n_out, args.steps)))

    mutate = None
    if args.corrupt_forget:
        def mutate(grads):  # diagnostic path: prove the checker catches a bad gradient
            grads["w_f"] = grads["w_f"] * 2.0
            return grads

    worst = lstm.gradient_check(model, features, targets, epsilon=args.epsilon, mutate=mutate)
    print(f"max relative error: {worst:.3e} (threshold {args.threshold:.1e})")
    if worst < args.threshold:
        print("gradient check passed")
        return EXIT_OK
    print("gradient check FAILED", file=sys.stderr)
    return EXIT_ANALYTIC


def cmd_serve(args: argparse.Namespace) -> int:
    if not 1 <= args.port <= 65535:
        print(f"error: port {args.port} outside 1..65535", file=sys.stderr)
        return EXIT_INPUT
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except KeyboardInterrupt:
        pass
    except (OSError, SystemExit) as exc:
        print(f"error: cannot serve on {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airrisk",
        description="Pollutant/case lag correlation, LSTM risk forecasting, and scenario service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate raster+cases+mask and write one bundle file")
    p.add_argument("--raster", required=True, help="raster series JSON (see README schema)")
    p.add_argument("--cases", required=True, help="CSV with header date,new_cases")
    p.add_argument("--mask", required=True, help="region mask JSON")
    p.add_argument("--out", required=True, help="output bundle path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("correlate", help="delay sweep on a bundle; report JSON + scatter CSVs")
    p.add_argument("--bundle", required=True)
    p.add_argument("--report", required=True, help="output report JSON path")
    p.add_argument("--scatter-dir", default=None, help="directory for per-delay scatter CSVs")
    p.add_argument("--window", type=int, default=5, help="bucket width in days (default 5)")
    p.add_argument("--max-delay", type=int, default=15, help="delays 0..N to sweep (default 15)")
    p.add_argument("--min-overlap", type=int, default=3)
    p.add_argument("--start-date", type=_parse_date, default=None,
                   help="bucket anchor date (default: first date across both series)")
    p.add_argument("--interpolate", choices=["none", "linear"], default="none",
                   help="fill interior bucket gaps linearly before aligning")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("train", help="train the LSTM on features+targets files")
    p.add_argument("--features", help="feature matrix JSON")
    p.add_argument("--targets", help="target matrix JSON")
    p.add_argument("--dataset", help="JSON with a 'samples' list of feature/target pairs")
    p.add_argument("--hidden", type=int, default=8)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--clip", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", required=True)
    p.add_argument("--loss-csv", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="run a saved model on a feature matrix")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("riskmap", help="export risk maps from a model + features")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--bbox", type=_parse_bbox, required=True,
                   help="lat_min,lat_max,lon_min,lon_max")
    p.add_argument("--resolution", choices=["macro", "micro"], default="macro")
    p.add_argument("--format", choices=["json", "pgm"], default="json")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--t", type=int, default=None, help="single timestep (default: all)")
    p.add_argument("--low", type=float, default=0.33)
    p.add_argument("--medium", type=float, default=0.66)
    p.add_argument("--start-date", type=_parse_date, default=date(2020, 1, 1))
    p.add_argument("--step-days", type=int, default=5)
    p.set_defaults(func=cmd_riskmap)

    p = sub.add_parser("gradcheck", help="compare BPTT gradients with central differences")
    p.add_argument("--n-in", type=int, default=3)
    p.add_argument("--n-hidden", type=int, default=4)
    p.add_argument("--n-out", type=int, default=2)
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=_positive_float, default=1e-5)
    p.add_argument("--threshold", type=_positive_float, default=1e-4)
    p.add_argument("--corrupt-forget", action="store_true",
                   help="debug: double the forget-gate gradient to prove detection")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default=None, help="persist models and reports here")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "train" and not args.dataset and not (args.features and args.targets):
        parser.error("train needs --dataset or both --features and --targets")
    try:
        return args.func(args)
    except (NoValidDelayError, UndefinedCorrelationError, InsufficientOverlapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYTIC
    except AirriskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
