"""Command-line interface: ``rankcpd {simulate,stat,detect,evaluate}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 I/O error.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .datagen import (
    SegmentSpec,
    fig1_specs,
    generate_segments,
    load_csv,
    load_labels,
    mean_shift_specs,
    write_csv,
    write_labels,
)
from .detector import (
    DetectorConfig,
    calibrate_threshold,
    local_maxima,
    scan,
    zero_pad,
)
from .errors import ParseError, RankCPDError
from .metrics import cp_auc, f1_score
from .ranks import two_sample_statistic

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


def _manifest(command, started, config=None, inputs=None, seed=None, **extra):
    out = {
        "command": command,
        "config": config,
        "inputs": {k: str(v) for k, v in (inputs or {}).items()},
        "seed": seed,
        "version": __version__,
        "backend": kernels.BACKEND,
        "duration_seconds": time.perf_counter() - started,
    }
    out.update(extra)
    return out


def _json_number(x):
    # JSON has no infinities; thresholds like --eta inf are written as strings
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    started = time.perf_counter()
    if args.spec_file:
        raw = json.loads(Path(args.spec_file).read_text())
        specs = [SegmentSpec.from_dict(d) for d in raw.get("segments", raw)]
        source = {"spec_file": args.spec_file}
    elif args.preset == "fig1":
        specs = fig1_specs(args.segment_length)
        source = {}
    elif args.preset == "mean-shift":
        specs = mean_shift_specs(args.segments, args.segment_length, args.dim, args.shift)
        source = {}
    else:
        raise UsageError("give --preset or --spec-file")
    labeled = generate_segments(specs, args.seed)
    out = _out_dir(args.out)
    write_csv(out / "series.csv", labeled.series)
    write_labels(out / "labels.txt", labeled.truth.change_points)
    manifest = _manifest(
        "simulate",
        started,
        config={"preset": args.preset, "segments": [s.as_dict() for s in specs]},
        inputs=source,
        seed=args.seed,
        outputs={"series": "series.csv", "labels": "labels.txt"},
        series_shape=list(labeled.series.shape),
        change_points=list(labeled.truth.change_points),
    )
    # timing would make repeated runs differ byte-for-byte
    manifest["duration_seconds"] = 0.0
    _dump(manifest, out / "manifest.json")
    return EXIT_OK


def cmd_stat(args):
    started = time.perf_counter()
    xs = load_csv(args.x, has_header=args.header)
    ys = load_csv(args.y, has_header=args.header)
    grid = load_csv(args.grid) if args.grid else None
    options = {}
    if args.epsilon > 0:
        options = {"normalize_cost": args.normalize_cost, "tolerance": args.tolerance,
                   "max_iters": args.max_iters}
    stat = two_sample_statistic(xs, ys, args.epsilon, grid, **options)
    result = stat.as_dict()
    result["manifest"] = _manifest(
        "stat",
        started,
        config={"epsilon": args.epsilon, "normalize_cost": args.normalize_cost},
        inputs={"x": args.x, "y": args.y, **({"grid": args.grid} if args.grid else {})},
    )
    _dump(result)
    return EXIT_OK


def _detector_config(args, eta):
    return DetectorConfig(
        window=args.window,
        epsilon=args.epsilon,
        delta=args.delta,
        eta=eta,
        use_scaled=args.scaled,
        stride=args.stride,
        normalize_cost=args.normalize_cost,
        sinkhorn_tolerance=args.tolerance,
        sinkhorn_max_iters=args.max_iters,
    )


def cmd_detect(args):
    started = time.perf_counter()
    if args.eta is None and args.calibrate_null is None:
        raise UsageError("detect needs --eta or --calibrate-null K")
    series = load_csv(args.series, has_header=args.header)
    shift = 0
    if args.pad is not None:
        pad = args.window if args.pad == 0 else args.pad
        series, shift = zero_pad(series, pad)
    config = _detector_config(args, 0.0 if args.eta is None else args.eta)
    calibration = None
    if args.eta is None:
        at = None if args.calibrate_at is None else args.calibrate_at + shift
        eta = calibrate_threshold(series, config, args.calibrate_null, args.quantile,
                                  args.seed, at=at)
        config = _detector_config(args, eta)
        calibration = {"permutations": args.calibrate_null, "quantile": args.quantile,
                       "position": args.calibrate_at, "eta": _json_number(eta)}
    trace = scan(series, config, workers=args.threads)
    found = local_maxima(trace.times, trace.values, config.delta, config.eta)
    out = _out_dir(args.out)
    write_csv(out / "trace.csv", np.column_stack([trace.times - shift, trace.values]),
              header=["t", "sigma"])
    result = {
        "change_points": [int(t) - shift for t in found],
        "eta": _json_number(config.eta),
        "shift": shift,
        "manifest": _manifest(
            "detect",
            started,
            config={**config.as_dict(), "eta": _json_number(config.eta)},
            inputs={"series": args.series},
            seed=args.seed if calibration else None,
            calibration=calibration,
            padding=shift,
        ),
    }
    _dump(result, out / "detections.json")
    _dump({"change_points": result["change_points"], "eta": result["eta"]})
    return EXIT_OK


def _load_trace(path):
    data = load_csv(path, has_header=True)
    if data.shape[1] != 2:
        raise ParseError("trace must have two columns (t, sigma)", path)
    times = data[:, 0]
    if np.any(times != np.round(times)):
        raise ParseError("trace times must be integers", path)
    return times.astype(np.int64), data[:, 1]


def cmd_evaluate(args):
    started = time.perf_counter()
    truth = load_labels(args.labels)
    margin = args.margin if args.margin is not None else args.delta
    if margin is None:
        raise UsageError("evaluate needs --margin or --delta")
    delta = args.delta if args.delta is not None else margin
    path = Path(args.input)
    auc = None
    if path.suffix.lower() == ".json":
        payload = json.loads(path.read_text())
        if "change_points" not in payload:
            raise ParseError("detections JSON lacks 'change_points'", path)
        detections = [int(c) for c in payload["change_points"]]
    else:
        if args.eta is None:
            raise UsageError("evaluating a trace needs --eta for the F1 threshold")
        times, values = _load_trace(path)
        detections = local_maxima(times, values, delta, args.eta)
        auc = cp_auc((times, values), truth, margin, delta)
    report = f1_score(detections, truth, margin).as_dict()
    report["auc"] = auc
    report["detections"] = detections
    report["manifest"] = _manifest(
        "evaluate",
        started,
        config={"margin": margin, "delta": delta,
                "eta": None if args.eta is None else _json_number(args.eta)},
        inputs={"input": args.input, "labels": args.labels},
    )
    _dump(report)
    return EXIT_OK


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_float(text):
    value = float(text)
    if not value >= 0 or math.isnan(value):
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return value


def _add_solver_flags(p):
    p.add_argument("--epsilon", type=_nonneg_float, default=0.0,
                   help="entropic regulariser; 0 selects exact rank energy")
    p.add_argument("--normalize-cost", action="store_true",
                   help="divide the cost matrix by its maximum (changes the scale of epsilon)")
    p.add_argument("--tolerance", type=float, default=1e-9, help="Sinkhorn marginal tolerance")
    p.add_argument("--max-iters", type=_positive_int, default=10_000)


def build_parser():
    parser = argparse.ArgumentParser(prog="rankcpd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic series, labels and manifest")
    p.add_argument("--preset", choices=["fig1", "mean-shift"])
    p.add_argument("--spec-file", help="JSON list of segments (length, mean, covariance_scale, kind)")
    p.add_argument("--segment-length", type=_positive_int, default=500)
    p.add_argument("--segments", type=_positive_int, default=5, help="mean-shift preset only")
    p.add_argument("--dim", type=_positive_int, default=3, help="mean-shift preset only")
    p.add_argument("--shift", type=float, default=1.0, help="mean-shift preset only")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stat", help="rank energy / soft rank energy of two samples")
    p.add_argument("--x", required=True, help="CSV of the first sample")
    p.add_argument("--y", required=True, help="CSV of the second sample")
    p.add_argument("--grid", help="CSV of m+n target points (default: Halton)")
    p.add_argument("--header", action="store_true", help="input CSVs have a header row")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_stat)

    p = sub.add_parser("detect", help="sliding-window scan and peak detection")
    p.add_argument("series", help="CSV time series, one observation per row")
    p.add_argument("--window", type=_positive_int, required=True)
    p.add_argument("--delta", type=_positive_int, required=True)
    p.add_argument("--eta", type=float)
    p.add_argument("--calibrate-null", type=_positive_int, metavar="K",
                   help="set eta from K permutations of a window pair")
    p.add_argument("--calibrate-at", type=int, help="window pair position (default: first)")
    p.add_argument("--quantile", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scaled", action="store_true", help="use mn/(m+n) times the statistic")
    p.add_argument("--stride", type=_positive_int, default=1)
    p.add_argument("--pad", type=int, nargs="?", const=0, default=None,
                   help="zero-pad both ends (default length: the window size)")
    p.add_argument("--threads", type=_positive_int, help="default: RANKCPD_THREADS or CPU count")
    p.add_argument("--header", action="store_true")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score a trace or detections against labels")
    p.add_argument("input", help="trace.csv (AUC and F1) or detections.json (F1)")
    p.add_argument("--labels", required=True)
    p.add_argument("--margin", type=_positive_int)
    p.add_argument("--delta", type=_positive_int)
    p.add_argument("--eta", type=float)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rankcpd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RankCPDError, json.JSONDecodeError, KeyError) as exc:
        print(f"rankcpd: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"rankcpd: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
