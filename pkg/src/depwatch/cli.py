"""The depwatch command-line tool.

Exit codes: 0 = scan clean, 1 = at least one suspicious library,
2 = operational error (bad input, missing files, provider failure).
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .canon import canonical_json
from .errors import DepwatchError
from .features import FeatureVector, LabeledDataset, MaintenanceLabel
from .forest import ForestHyperparams, train_classifier
from .report import render_report
from .scan import ScanConfig, evaluate, load_config_file, run_scan, scan_single
from .synth import generate_synthetic_ecosystem

EXIT_CLEAN = 0
EXIT_SUSPICIOUS = 1
EXIT_ERROR = 2


def _add_scan_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--snapshot", help="dependency snapshot JSON file")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--store", help="offline activity store directory")
    source.add_argument("--api", help="live forge API base URL")
    parser.add_argument("--as-of", help="reference date (ISO, default: today UTC)")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--model", help="trained classifier model file")
    mode.add_argument(
        "--rules-only", action="store_true", help="classify with the labeling rules (default)"
    )
    parser.add_argument("--horizons", help="comma-separated months, e.g. 1,3,6,9,12")
    parser.add_argument(
        "--format", choices=["json", "text", "markdown"], default="json", dest="fmt"
    )
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--config", help="JSON config file mirroring the scan configuration")
    parser.add_argument(
        "--cost-per-review-hours",
        type=float,
        help="hours per manual library review; reports hours saved in the summary",
    )


def _build_scan_config(args: argparse.Namespace) -> ScanConfig:
    kwargs: dict = {}
    if args.config:
        kwargs = load_config_file(args.config)
    if args.snapshot:
        kwargs["snapshot_path"] = Path(args.snapshot)
    if args.store:
        kwargs["store_path"] = Path(args.store)
        kwargs.pop("api_url", None)
    if args.api:
        kwargs["api_url"] = args.api
        kwargs.pop("store_path", None)
    if args.as_of:
        kwargs["as_of"] = date.fromisoformat(args.as_of)
    kwargs.setdefault("as_of", date.today())
    if args.model:
        kwargs["model_path"] = Path(args.model)
    if args.rules_only:
        kwargs["model_path"] = None
    if args.horizons:
        kwargs["horizons"] = tuple(int(m) for m in args.horizons.split(","))
    if args.cost_per_review_hours is not None:
        kwargs["cost_per_review_hours"] = args.cost_per_review_hours
    if "snapshot_path" not in kwargs:
        raise DepwatchError("a snapshot file is required (--snapshot or config file)")
    return ScanConfig(**kwargs)


def _emit(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _report_exit(report) -> int:
    return EXIT_SUSPICIOUS if report.suspicious_count else EXIT_CLEAN


def _cmd_scan(args: argparse.Namespace) -> int:
    config = _build_scan_config(args)
    report = run_scan(config)
    _emit(render_report(report, args.fmt), args.out)
    return _report_exit(report)


def _cmd_lib(args: argparse.Namespace) -> int:
    if bool(args.id) == bool(args.file):
        raise DepwatchError("give exactly one of: a library id, or --file with ids")
    if args.file:
        ids = [line.strip() for line in Path(args.file).read_text(encoding="utf-8").splitlines()]
        ids = [line for line in ids if line and not line.startswith("#")]
    else:
        ids = [args.id]
    config = _build_scan_config(args)
    report = scan_single(ids, config)
    _emit(render_report(report, args.fmt), args.out)
    return _report_exit(report)


def load_dataset_file(path: str | Path) -> LabeledDataset:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = tuple(
        (FeatureVector.from_dict(row["features"]), MaintenanceLabel(row["label"]))
        for row in doc["rows"]
    )
    return LabeledDataset(rows=rows)


def _cmd_train(args: argparse.Namespace) -> int:
    dataset = load_dataset_file(args.dataset)
    hp = ForestHyperparams(
        n_trees=args.trees,
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        seed=args.seed,
    )
    model = train_classifier(dataset, hp)
    model.save(args.out)
    histogram = {label.value: n for label, n in dataset.histogram().items()}
    print(f"trained {hp.n_trees} trees on {len(dataset.rows)} rows {histogram} -> {args.out}")
    return EXIT_CLEAN


def _cmd_synth(args: argparse.Namespace) -> int:
    eco = generate_synthetic_ecosystem(
        seed=args.seed,
        n_libraries=args.n,
        edge_density=args.edge_density,
        as_of=date.fromisoformat(args.as_of) if args.as_of else date(2024, 1, 1),
    )
    out = eco.write(args.out)
    print(f"wrote {len(eco.series)} libraries to {out}")
    return EXIT_CLEAN


def _cmd_eval(args: argparse.Namespace) -> int:
    result = evaluate(
        args.truth,
        model_path=Path(args.model) if args.model else None,
        binary=args.binary,
    )
    _emit(canonical_json(result.to_dict()).encode("utf-8"), args.out)
    return EXIT_CLEAN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depwatch",
        description="Monitor the maintenance activity of direct and transitive OSS dependencies.",
    )
    parser.add_argument("--version", action="version", version=f"depwatch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="scan every library in a dependency snapshot")
    _add_scan_options(scan)
    scan.set_defaults(func=_cmd_scan)

    lib = sub.add_parser("lib", help="scan selected libraries and their transitive deps")
    lib.add_argument("id", nargs="?", help="library id, e.g. npm:left-pad@1.3.0")
    lib.add_argument("--file", help="file with one library id per line")
    _add_scan_options(lib)
    lib.set_defaults(func=_cmd_lib)

    train = sub.add_parser("train", help="train the random-forest classifier")
    train.add_argument("--dataset", required=True, help="labeled dataset JSON file")
    train.add_argument("--seed", type=int, required=True)
    train.add_argument("--out", required=True, help="model file to write")
    train.add_argument("--trees", type=int, default=100)
    train.add_argument("--max-depth", type=int, default=16)
    train.add_argument("--min-samples-leaf", type=int, default=1)
    train.set_defaults(func=_cmd_train)

    synth = sub.add_parser("synth", help="generate a synthetic labeled ecosystem")
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--n", type=int, required=True, help="number of libraries")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--edge-density", type=float, default=0.08)
    synth.add_argument("--as-of", help="reference date (ISO)")
    synth.set_defaults(func=_cmd_synth)

    ev = sub.add_parser("eval", help="score a scan against generated ground truth")
    ev.add_argument("--truth", required=True, help="generator output directory")
    ev.add_argument("--model", help="trained model file (default: labeling rules)")
    ev.add_argument("--binary", action="store_true", help="also report maintained-vs-not metrics")
    ev.add_argument("--out", help="write metrics here instead of stdout")
    ev.set_defaults(func=_cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DepwatchError as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(json.dumps(error, sort_keys=True) + "\n")
        return EXIT_ERROR
    except OSError as exc:
        error = {"error": {"type": "OSError", "message": str(exc)}}
        sys.stderr.write(json.dumps(error, sort_keys=True) + "\n")
        return EXIT_ERROR


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
