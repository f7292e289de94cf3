"""Scan orchestration: snapshot -> graph -> features -> verdicts -> report."""

from __future__ import annotations

import json
import warnings as _warnings
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from . import __version__
from .depgraph import (
    DependencyGraph,
    DependencySnapshot,
    LibraryId,
    build_graph,
    parse_snapshot,
    transitive_dependencies,
)
from .errors import FitError, NotFoundError, ValidationError
from .evaluation import (
    accuracy,
    binary_confusion,
    confusion_matrix,
    macro_f1,
    per_class_metrics,
)
from .features import (
    DEFAULT_THRESHOLDS,
    FeatureVector,
    LabelDistribution,
    LabelingThresholds,
    MaintenanceLabel,
    RuleBasedClassifier,
    compute_features,
)
from .forecast import forecast_labels
from .forest import RandomForestModel
from .propagate import (
    DEFAULT_PROPAGATION,
    PropagationConfig,
    Verdict,
    aggregate_verdicts,
    risk_scores,
)
from .providers import DateRange, ForgeApiClient, OfflineStore, fetch_many
from .report import EffortMetrics, Report, ReportEntry, effort_metrics, recommend_action

GRAPH_NOTE = "dependency graph held fixed across forecast horizons"


@dataclass(frozen=True)
class LibraryContext:
    """Human-supplied decision context the tool cannot infer."""

    security_relevant: bool
    alternatives_exist: bool


@dataclass(frozen=True)
class ScanConfig:
    snapshot_path: Path
    as_of: date
    store_path: Path | None = None
    api_url: str | None = None
    horizons: tuple[int, ...] = (1, 3, 6, 9, 12)
    model_path: Path | None = None  # None -> rules-only classification
    propagation: PropagationConfig = DEFAULT_PROPAGATION
    thresholds: LabelingThresholds = DEFAULT_THRESHOLDS
    context: dict[str, LibraryContext] = field(default_factory=dict)
    security_relevant_default: bool = True
    alternatives_exist_default: bool = False
    prefer_continue_over_replace: bool = False
    feature_complete_is_negative: bool = True
    forecast_method: str = "holt"
    cost_per_review_hours: float | None = None
    max_workers: int = 4

    def __post_init__(self):
        if (self.store_path is None) == (self.api_url is None):
            raise ValidationError("exactly one activity source (store or api) must be configured")
        bad = [m for m in self.horizons if m not in (1, 3, 6, 9, 12)]
        if bad:
            raise ValidationError(f"horizons must be among 1,3,6,9,12; got {bad}")

    def provider(self):
        if self.store_path is not None:
            return OfflineStore(self.store_path)
        return ForgeApiClient(self.api_url)

    def classifier(self):
        if self.model_path is None:
            return RuleBasedClassifier(self.thresholds)
        return RandomForestModel.load(self.model_path)


def load_config_file(path: str | Path) -> dict:
    """Read the JSON config file into ScanConfig keyword arguments."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    kwargs: dict = {}
    if "snapshot" in doc:
        kwargs["snapshot_path"] = Path(doc["snapshot"])
    if "store" in doc:
        kwargs["store_path"] = Path(doc["store"])
    if "api" in doc:
        kwargs["api_url"] = doc["api"]
    if "as_of" in doc:
        kwargs["as_of"] = date.fromisoformat(doc["as_of"])
    if "horizons" in doc:
        kwargs["horizons"] = tuple(int(m) for m in doc["horizons"])
    if "model" in doc:
        kwargs["model_path"] = Path(doc["model"])
    if "propagation" in doc:
        kwargs["propagation"] = PropagationConfig(**doc["propagation"])
    if "thresholds" in doc:
        kwargs["thresholds"] = LabelingThresholds(**doc["thresholds"])
    if "context" in doc:
        kwargs["context"] = {
            lib: LibraryContext(
                security_relevant=bool(entry.get("security_relevant", True)),
                alternatives_exist=bool(entry.get("alternatives_exist", False)),
            )
            for lib, entry in doc["context"].items()
        }
    defaults = doc.get("defaults", {})
    if "security_relevant" in defaults:
        kwargs["security_relevant_default"] = bool(defaults["security_relevant"])
    if "alternatives_exist" in defaults:
        kwargs["alternatives_exist_default"] = bool(defaults["alternatives_exist"])
    for key in (
        "prefer_continue_over_replace",
        "feature_complete_is_negative",
        "forecast_method",
        "cost_per_review_hours",
        "max_workers",
    ):
        if key in doc:
            kwargs[key] = doc[key]
    return kwargs


def _load_snapshot(config: ScanConfig) -> tuple[DependencySnapshot, list[str]]:
    data = Path(config.snapshot_path).read_bytes()
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        snapshot = parse_snapshot(data)
    return snapshot, [str(w.message) for w in caught]


def _pipeline(
    graph: DependencyGraph,
    snapshot: DependencySnapshot,
    config: ScanConfig,
    warnings: list[str],
    effort: EffortMetrics | None = None,
) -> Report:
    classifier = config.classifier()
    provider = config.provider()
    window = DateRange(start=None, end=config.as_of)

    repos = {}
    for node in graph.nodes:
        record = snapshot.record(node)
        if record.repo is not None:
            repos[node] = record.repo
        else:
            warnings.append(f"{node}: no repository reference; labeled Inactive (no data)")

    fetched = fetch_many(
        provider, [repos[n] for n in graph.nodes if n in repos], window, config.max_workers
    )

    labels: dict[LibraryId, MaintenanceLabel] = {}
    dists: dict[LibraryId, LabelDistribution] = {}
    series_by_node = {}
    features_by_node: dict[LibraryId, FeatureVector] = {}
    for node in graph.nodes:
        repo = repos.get(node)
        outcome = fetched.get(repo) if repo is not None else None
        if repo is None or isinstance(outcome, Exception):
            if isinstance(outcome, Exception):
                warnings.append(f"{node}: activity fetch failed ({outcome}); labeled Inactive (no data)")
            labels[node] = MaintenanceLabel.INACTIVE
            dists[node] = LabelDistribution.point_mass(MaintenanceLabel.INACTIVE)
            continue
        series_by_node[node] = outcome
        fv = compute_features(outcome, config.as_of, config.thresholds)
        features_by_node[node] = fv
        dist = classifier.classify(fv)
        labels[node] = dist.argmax()
        dists[node] = dist

    risk = risk_scores(graph, labels, config.propagation)
    verdicts = aggregate_verdicts(
        graph, labels, risk, feature_complete_is_negative=config.feature_complete_is_negative
    )

    entries = []
    for node in graph.nodes:
        node_warnings: list[str] = []
        if node in series_by_node:
            try:
                horizons = forecast_labels(
                    series_by_node[node],
                    classifier,
                    config.horizons,
                    config.as_of,
                    method=config.forecast_method,
                    thresholds=config.thresholds,
                )
            except FitError as exc:
                node_warnings.append(f"forecast unavailable ({exc}); horizons carry the current label")
                horizons = {m: (labels[node], dists[node]) for m in config.horizons}
        else:
            horizons = {
                m: (MaintenanceLabel.INACTIVE, LabelDistribution.point_mass(MaintenanceLabel.INACTIVE))
                for m in config.horizons
            }
        verdict = verdicts[node]
        action = None
        if verdict.verdict is Verdict.SUSPICIOUS:
            ctx = config.context.get(str(node))
            action = recommend_action(
                verdict,
                ctx.security_relevant if ctx else config.security_relevant_default,
                ctx.alternatives_exist if ctx else config.alternatives_exist_default,
                prefer_continue_over_replace=config.prefer_continue_over_replace,
            )
        entries.append(
            ReportEntry(
                id=node,
                label=labels[node],
                distribution=dists[node],
                verdict=verdict.verdict,
                culprits=verdict.culprits,
                risk_score=verdict.risk_score,
                horizons=horizons,
                action=action,
                warnings=tuple(node_warnings),
            )
        )

    review_hours_saved = None
    if config.cost_per_review_hours is not None:
        spared = len(entries) - sum(1 for e in entries if e.verdict is Verdict.SUSPICIOUS)
        review_hours_saved = config.cost_per_review_hours * spared

    return Report(
        version=__version__,
        as_of=config.as_of,
        entries=tuple(entries),
        warnings=tuple(sorted(warnings)),
        notes=(GRAPH_NOTE,),
        effort=effort,
        review_hours_saved=review_hours_saved,
    )


def run_scan(config: ScanConfig) -> Report:
    """The CI entry point: scan every library declared in the snapshot."""
    snapshot, warnings = _load_snapshot(config)
    graph, graph_warnings = build_graph(snapshot)
    warnings.extend(graph_warnings)
    return _pipeline(graph, snapshot, config, warnings)


def scan_single(ids: list[str], config: ScanConfig) -> Report:
    """Scan selected libraries (plus everything they transitively depend on)."""
    if not ids:
        raise ValidationError("no library ids given")
    snapshot, warnings = _load_snapshot(config)
    graph, graph_warnings = build_graph(snapshot)
    warnings.extend(graph_warnings)
    keep: set[LibraryId] = set()
    for raw in ids:
        lib = LibraryId.parse(raw)
        if lib not in graph:
            raise NotFoundError(f"library {raw} is not declared in the snapshot")
        keep.add(lib)
        keep |= transitive_dependencies(graph, lib)
    return _pipeline(graph.subgraph(keep), snapshot, config, warnings)


@dataclass(frozen=True)
class EvaluationResult:
    effort: EffortMetrics
    confusion: list[list[int]]
    accuracy: float
    macro_f1: float
    per_class: dict[str, dict[str, float]]
    binary: dict[str, int] | None = None

    def to_dict(self) -> dict:
        out = {
            "effort": self.effort.to_dict(),
            "confusion_matrix": self.confusion,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": self.per_class,
        }
        if self.binary is not None:
            out["binary"] = {k: int(v) for k, v in self.binary.items()}
        return out


def evaluate(
    truth_dir: str | Path,
    *,
    model_path: Path | None = None,
    binary: bool = False,
    config_overrides: dict | None = None,
) -> EvaluationResult:
    """Score a scan against a generated ecosystem's ground truth.

    ``truth_dir`` is a generator output directory (snapshot.json, store/,
    truth.json, meta.json). Suspicion ground truth derives from the truth
    labels with the same all-or-nothing transitive rule the scanner applies.
    """
    root = Path(truth_dir)
    meta = json.loads((root / "meta.json").read_text(encoding="utf-8"))
    truth_doc = json.loads((root / "truth.json").read_text(encoding="utf-8"))
    truth = {
        LibraryId.parse(lib): MaintenanceLabel(value)
        for lib, value in truth_doc["labels"].items()
    }
    kwargs = {
        "snapshot_path": root / "snapshot.json",
        "store_path": root / "store",
        "as_of": date.fromisoformat(meta["as_of"]),
        "model_path": model_path,
    }
    if config_overrides:
        kwargs.update(config_overrides)
    config = ScanConfig(**kwargs)
    report = run_scan(config)

    predicted = {entry.id: entry.label for entry in report.entries}
    nodes = sorted(truth, key=lambda l: l.sort_key)
    missing = [str(n) for n in nodes if n not in predicted]
    if missing:
        raise ValidationError(f"scan produced no entry for: {', '.join(missing)}")
    truth_list = [truth[n] for n in nodes]
    pred_list = [predicted[n] for n in nodes]
    matrix = confusion_matrix(truth_list, pred_list)

    snapshot, _ = _load_snapshot(config)
    graph, _ = build_graph(snapshot)
    truth_verdicts = aggregate_verdicts(
        graph,
        truth,
        {n: 0.0 for n in graph.nodes},
        feature_complete_is_negative=config.feature_complete_is_negative,
    )
    reported = {e.id for e in report.entries if e.verdict is Verdict.SUSPICIOUS}
    truly = {n for n, v in truth_verdicts.items() if v.verdict is Verdict.SUSPICIOUS}
    effort = effort_metrics(
        len(nodes), len(reported), (len(truly), len(reported & truly))
    )
    per_class = {
        label.value: {"precision": m.precision, "recall": m.recall, "f1": m.f1, "support": m.support}
        for label, m in per_class_metrics(matrix).items()
    }
    return EvaluationResult(
        effort=effort,
        confusion=[[int(v) for v in row] for row in matrix],
        accuracy=accuracy(matrix),
        macro_f1=macro_f1(matrix),
        per_class=per_class,
        binary=binary_confusion(truth_list, pred_list) if binary else None,
    )
