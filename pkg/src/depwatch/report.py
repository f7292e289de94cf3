"""Report assembly: recommended actions, effort metrics, rendering."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from enum import Enum

from .canon import canonical_json_bytes
from .depgraph import LibraryId
from .errors import ValidationError
from .features import LABEL_ORDER, LabelDistribution, MaintenanceLabel
from .propagate import SuspicionVerdict, Verdict


class Action(Enum):
    IGNORE_WARNINGS = "IgnoreWarnings"
    REPLACEMENT = "Replacement"
    CONTINUE_DEVELOPMENT = "ContinueDevelopment"


def recommend_action(
    verdict: SuspicionVerdict,
    security_relevant: bool,
    alternatives_exist: bool,
    *,
    prefer_continue_over_replace: bool = False,
) -> Action:
    """Decision branches for a suspicious library.

    Not security relevant -> the warnings can be ignored. Security relevant
    with known alternatives -> replace (or continue development when that is
    the configured preference). Security relevant without alternatives ->
    continue development (own fork or upstream contributions).
    """
    if verdict.verdict is not Verdict.SUSPICIOUS:
        raise ValidationError("actions apply to suspicious libraries only")
    if not security_relevant:
        return Action.IGNORE_WARNINGS
    if alternatives_exist and not prefer_continue_over_replace:
        return Action.REPLACEMENT
    return Action.CONTINUE_DEVELOPMENT


@dataclass(frozen=True)
class EffortMetrics:
    """Manual-review savings: the tool reports a subset; the rest is saved effort."""

    total_libraries: int
    reported_suspicious: int
    effort_reduction: float
    true_suspicious: int | None = None
    true_positives: int | None = None
    recall: float | None = None
    precision: float | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "total_libraries": self.total_libraries,
            "reported_suspicious": self.reported_suspicious,
            "effort_reduction": self.effort_reduction,
        }
        if self.true_suspicious is not None:
            out.update(
                {
                    "true_suspicious": self.true_suspicious,
                    "true_positives": self.true_positives,
                    "recall": self.recall,
                    "precision": self.precision,
                }
            )
        return out


def effort_metrics(
    total: int, reported: int, truth: tuple[int, int] | None = None
) -> EffortMetrics:
    """effort_reduction = 1 - reported/total; recall and precision only with truth.

    ``truth`` is (true_suspicious, true_positives). Degenerate denominators
    resolve to 1.0: zero reported means perfect precision is vacuous, zero
    truly-suspicious means nothing could be missed.
    """
    if total < 0 or reported < 0 or reported > total:
        raise ValidationError("need 0 <= reported <= total")
    if total == 0:
        raise ValidationError("total must be positive")
    result = EffortMetrics(
        total_libraries=total,
        reported_suspicious=reported,
        effort_reduction=1.0 - reported / total,
    )
    if truth is None:
        return result
    true_suspicious, true_positives = truth
    if true_suspicious < 0 or true_positives < 0:
        raise ValidationError("truth counts must be >= 0")
    if true_positives > min(reported, true_suspicious):
        raise ValidationError("true_positives cannot exceed reported or true_suspicious")
    recall = true_positives / true_suspicious if true_suspicious else 1.0
    precision = true_positives / reported if reported else 1.0
    return EffortMetrics(
        total_libraries=total,
        reported_suspicious=reported,
        effort_reduction=result.effort_reduction,
        true_suspicious=true_suspicious,
        true_positives=true_positives,
        recall=recall,
        precision=precision,
    )


@dataclass(frozen=True)
class ReportEntry:
    id: LibraryId
    label: MaintenanceLabel
    distribution: LabelDistribution
    verdict: Verdict
    culprits: tuple[tuple[LibraryId, MaintenanceLabel], ...]
    risk_score: float
    horizons: dict[int, tuple[MaintenanceLabel, LabelDistribution]]
    action: Action | None
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": str(self.id),
            "label": self.label.value,
            "distribution": self.distribution.to_dict(),
            "verdict": self.verdict.value,
            "culprits": [{"id": str(c), "label": lab.value} for c, lab in self.culprits],
            "risk_score": float(self.risk_score),
            "forecast": {
                str(months): {"label": label.value, "distribution": dist.to_dict()}
                for months, (label, dist) in sorted(self.horizons.items())
            },
            "action": self.action.value if self.action else None,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class Report:
    version: str
    as_of: date
    entries: tuple[ReportEntry, ...]
    warnings: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()
    effort: EffortMetrics | None = None
    review_hours_saved: float | None = None

    @property
    def suspicious_count(self) -> int:
        return sum(1 for e in self.entries if e.verdict is Verdict.SUSPICIOUS)

    def label_counts(self) -> dict[str, int]:
        counts = {label.value: 0 for label in LABEL_ORDER}
        for entry in self.entries:
            counts[entry.label.value] += 1
        return counts

    def to_dict(self) -> dict:
        summary: dict = {
            "total_libraries": len(self.entries),
            "label_counts": self.label_counts(),
            "suspicious": self.suspicious_count,
        }
        if self.effort is not None:
            summary["effort"] = self.effort.to_dict()
        if self.review_hours_saved is not None:
            summary["review_hours_saved"] = float(self.review_hours_saved)
        return {
            "tool": "depwatch",
            "version": self.version,
            "as_of": self.as_of.isoformat(),
            "entries": [e.to_dict() for e in sorted(self.entries, key=lambda e: e.id.sort_key)],
            "summary": summary,
            "warnings": sorted(self.warnings),
            "notes": list(self.notes),
        }


def _table_rows(report: Report) -> list[ReportEntry]:
    return sorted(report.entries, key=lambda e: (-e.risk_score, e.id.sort_key))


def render_report(report: Report, fmt: str = "json") -> bytes:
    """Serialize the report: canonical JSON, or a risk-sorted text/markdown table."""
    if fmt == "json":
        return canonical_json_bytes(report.to_dict())
    if fmt not in ("text", "markdown"):
        raise ValidationError(f"unknown report format {fmt!r}")

    rows = _table_rows(report)
    lines: list[str] = []
    counts = report.label_counts()
    headline = (
        f"depwatch {report.version} as of {report.as_of.isoformat()}: "
        f"{len(report.entries)} libraries, {report.suspicious_count} suspicious"
    )
    if fmt == "markdown":
        lines.append(f"# Dependency maintenance report")
        lines.append("")
        lines.append(headline)
        lines.append("")
        lines.append("| library | label | verdict | risk | culprits | action |")
        lines.append("|---|---|---|---:|---|---|")
        for e in rows:
            culprits = ", ".join(str(c) for c, _ in e.culprits[:3])
            if len(e.culprits) > 3:
                culprits += f" (+{len(e.culprits) - 3})"
            lines.append(
                f"| {e.id} | {e.label.value} | {e.verdict.value} | {e.risk_score:.6f} "
                f"| {culprits or '-'} | {e.action.value if e.action else '-'} |"
            )
        lines.append("")
        lines.append(
            "Labels: " + ", ".join(f"{name} {counts[name]}" for name in counts)
        )
        if report.effort is not None:
            lines.append("")
            lines.append(
                f"Effort reduction: {report.effort.effort_reduction:.1%} "
                f"({report.effort.reported_suspicious}/{report.effort.total_libraries} need review)"
            )
        if report.warnings:
            lines.append("")
            lines.append("Warnings:")
            lines.extend(f"- {w}" for w in sorted(report.warnings))
        for note in report.notes:
            lines.append("")
            lines.append(f"_{note}_")
    else:
        lines.append(headline)
        lines.append("-" * len(headline))
        width = max((len(str(e.id)) for e in rows), default=8)
        for e in rows:
            forecast = " ".join(
                f"{m}mo:{label.value}" for m, (label, _) in sorted(e.horizons.items())
            )
            lines.append(
                f"{str(e.id):<{width}}  {e.label.value:<15} {e.verdict.value:<13} "
                f"risk={e.risk_score:.6f}  {forecast}"
            )
        lines.append("labels: " + ", ".join(f"{name}={counts[name]}" for name in counts))
        if report.warnings:
            lines.extend(f"warning: {w}" for w in sorted(report.warnings))
    return ("\n".join(lines) + "\n").encode("utf-8")
