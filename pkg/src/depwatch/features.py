"""Maintenance-activity features, the four-state label, and the labeling rules.

Feature windows are approximated by whole weeks: a trailing N-day window at
``as_of`` covers every bucket whose week_start lies in [as_of - N, as_of].
"days since" distances are measured to week starts (buckets carry no finer
dates), so they are conservative by at most six days.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum

import numpy as np

from .activity import ActivityTimeSeries
from .errors import ValidationError


class MaintenanceLabel(Enum):
    ACTIVE = "Active"
    FEATURE_COMPLETE = "FeatureComplete"
    DORMANT = "Dormant"
    INACTIVE = "Inactive"


# Fixed order; ties anywhere (argmax, leaf votes) break toward the earlier label.
LABEL_ORDER: tuple[MaintenanceLabel, ...] = (
    MaintenanceLabel.ACTIVE,
    MaintenanceLabel.FEATURE_COMPLETE,
    MaintenanceLabel.DORMANT,
    MaintenanceLabel.INACTIVE,
)

NO_RESPONSE_DATA = -1.0  # sentinel: no issue-response samples observed

NUMERIC_FEATURES: tuple[str, ...] = (
    "commits_30d",
    "commits_90d",
    "commits_365d",
    "contributors_365d",
    "core_contributors_365d",
    "days_since_last_commit",
    "days_since_last_release",
    "releases_365d",
    "issues_opened_365d",
    "issues_closed_365d",
    "issue_close_ratio_365d",
    "median_issue_response_hours",
    "stars_total",
    "project_age_days",
)
FLAG_FEATURES: tuple[str, ...] = ("archived", "readme_deprecated", "readme_stable_declared")
FEATURE_NAMES: tuple[str, ...] = NUMERIC_FEATURES + FLAG_FEATURES
SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class FeatureVector:
    """Project-level maintenance features as of a reference date."""

    commits_30d: float
    commits_90d: float
    commits_365d: float
    contributors_365d: float
    core_contributors_365d: float
    days_since_last_commit: float
    days_since_last_release: float
    releases_365d: float
    issues_opened_365d: float
    issues_closed_365d: float
    issue_close_ratio_365d: float
    median_issue_response_hours: float
    stars_total: float
    project_age_days: float
    archived: bool
    readme_deprecated: bool
    readme_stable_declared: bool

    def __post_init__(self):
        for name in NUMERIC_FEATURES:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            if name != "median_issue_response_hours" and value < 0:
                raise ValidationError(f"{name} must be >= 0, got {value!r}")
        if not (0.0 <= self.issue_close_ratio_365d <= 1.0):
            raise ValidationError("issue_close_ratio_365d must lie in [0, 1]")
        if self.median_issue_response_hours < 0 and self.median_issue_response_hours != NO_RESPONSE_DATA:
            raise ValidationError("median_issue_response_hours must be >= 0 or the -1 sentinel")

    def to_array(self) -> np.ndarray:
        values = [float(getattr(self, name)) for name in NUMERIC_FEATURES]
        values += [1.0 if getattr(self, name) else 0.0 for name in FLAG_FEATURES]
        return np.array(values, dtype=float)

    def to_dict(self) -> dict:
        out: dict = {name: float(getattr(self, name)) for name in NUMERIC_FEATURES}
        out.update({name: bool(getattr(self, name)) for name in FLAG_FEATURES})
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureVector":
        try:
            kwargs = {name: float(doc[name]) for name in NUMERIC_FEATURES}
            kwargs.update({name: bool(doc[name]) for name in FLAG_FEATURES})
        except KeyError as exc:
            raise ValidationError(f"feature vector missing {exc.args[0]!r}") from exc
        return cls(**kwargs)


@dataclass(frozen=True)
class LabelingThresholds:
    """Tunable constants behind the labeling rules (defaults documented below)."""

    active_window_days: int = 90
    dormant_max_days: int = 365
    responsive_max_hours: float = 336.0  # 14 days
    core_share: float = 0.8


DEFAULT_THRESHOLDS = LabelingThresholds()


def compute_features(
    activity: ActivityTimeSeries,
    as_of: date,
    thresholds: LabelingThresholds = DEFAULT_THRESHOLDS,
) -> FeatureVector:
    """Feature vector over trailing windows ending at ``as_of``.

    Core contributors form the smallest author set covering at least
    ``thresholds.core_share`` of trailing-365d commits (descending commit
    count, then ascending author id). When some active week lacks per-author
    detail the exact rule is impossible; contributor counts then fall back to
    the maximum weekly count in the window and the core set to
    ceil(share * contributors).
    """
    if as_of < activity.created_at:
        raise ValidationError(f"as_of {as_of} precedes repository creation {activity.created_at}")

    def window(days: int):
        lo = as_of - timedelta(days=days)
        return [w for w in activity.weeks if lo <= w.week_start <= as_of]

    w30, w90, w365 = window(30), window(90), window(365)
    commits_30d = sum(w.commits for w in w30)
    commits_90d = sum(w.commits for w in w90)
    commits_365d = sum(w.commits for w in w365)

    age_days = (as_of - activity.created_at).days

    visible = [w for w in activity.weeks if w.week_start <= as_of]
    active_weeks = [w for w in visible if w.commits > 0]
    if active_weeks:
        days_since_last_commit = (as_of - active_weeks[-1].week_start).days
    else:
        days_since_last_commit = age_days

    releases_past = [d for d in activity.releases if d <= as_of]
    if releases_past:
        days_since_last_release = (as_of - max(releases_past)).days
    else:
        days_since_last_release = age_days
    releases_365d = sum(1 for d in releases_past if d >= as_of - timedelta(days=365))

    opened = sum(w.issues_opened for w in w365)
    closed = sum(w.issues_closed for w in w365)
    close_ratio = 1.0 if opened == 0 else min(1.0, closed / opened)

    samples = sorted(activity.issue_response_samples_hours)
    median_response = float(np.median(samples)) if samples else NO_RESPONSE_DATA

    commit_weeks_365 = [w for w in w365 if w.commits > 0]
    if commit_weeks_365 and all(w.commit_authors is not None for w in commit_weeks_365):
        totals: dict[str, int] = {}
        for w in commit_weeks_365:
            for author, n in w.commit_authors or ():
                totals[author] = totals.get(author, 0) + n
        contributors = len(totals)
        target = thresholds.core_share * sum(totals.values())
        core = 0
        covered = 0
        for author, n in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0])):
            core += 1
            covered += n
            if covered >= target:
                break
        core_contributors = core
    elif commit_weeks_365:
        contributors = max(w.active_contributors for w in w365)
        core_contributors = math.ceil(thresholds.core_share * contributors)
    else:
        contributors = 0
        core_contributors = 0

    stars = visible[-1].stars_total if visible else 0
    archived = activity.archived_at is not None and activity.archived_at <= as_of

    return FeatureVector(
        commits_30d=float(commits_30d),
        commits_90d=float(commits_90d),
        commits_365d=float(commits_365d),
        contributors_365d=float(contributors),
        core_contributors_365d=float(core_contributors),
        days_since_last_commit=float(days_since_last_commit),
        days_since_last_release=float(days_since_last_release),
        releases_365d=float(releases_365d),
        issues_opened_365d=float(opened),
        issues_closed_365d=float(closed),
        issue_close_ratio_365d=float(close_ratio),
        median_issue_response_hours=float(median_response),
        stars_total=float(stars),
        project_age_days=float(age_days),
        archived=archived,
        readme_deprecated=activity.readme_deprecated,
        readme_stable_declared=activity.readme_stable_declared,
    )


def labeling_rule(
    features: FeatureVector, thresholds: LabelingThresholds = DEFAULT_THRESHOLDS
) -> tuple[str, MaintenanceLabel]:
    """The rule (R0..R4) that fires for ``features`` under precedence, plus its label.

    R0 archived or README-deprecated projects are Inactive regardless of cadence.
    R1 commit within the active window (and any commits in it) means Active.
    R2 a 90..365-day gap after real prior activity is Dormant, not dead.
    R3 a >365-day gap with a declared-stable README or a responsive issue
       history marks finished-but-watched code: FeatureComplete.
    R4 everything else is Inactive.

    R1/R2 on last-commit age alone would miscount finished projects as dead and
    recently-stalled ones as alive; R3 and the R2 prior-activity guard exist to
    split those cases.
    """
    active_days = thresholds.active_window_days
    dormant_days = thresholds.dormant_max_days
    if features.archived or features.readme_deprecated:
        return "R0", MaintenanceLabel.INACTIVE
    if features.commits_90d >= 1 and features.days_since_last_commit <= active_days:
        return "R1", MaintenanceLabel.ACTIVE
    had_prior_activity = (
        features.commits_365d >= 1
        or features.days_since_last_commit < features.project_age_days
    )
    if active_days < features.days_since_last_commit <= dormant_days and had_prior_activity:
        return "R2", MaintenanceLabel.DORMANT
    responsive = 0.0 <= features.median_issue_response_hours <= thresholds.responsive_max_hours
    if features.days_since_last_commit > dormant_days and (
        features.readme_stable_declared or responsive
    ):
        return "R3", MaintenanceLabel.FEATURE_COMPLETE
    return "R4", MaintenanceLabel.INACTIVE


def apply_labeling_strategy(
    features: FeatureVector, thresholds: LabelingThresholds = DEFAULT_THRESHOLDS
) -> MaintenanceLabel:
    """Deterministic label from the rule table; total over valid vectors."""
    return labeling_rule(features, thresholds)[1]


@dataclass(frozen=True)
class LabeledDataset:
    """Feature vectors paired with labels, under one fixed schema."""

    rows: tuple[tuple[FeatureVector, MaintenanceLabel], ...]
    schema: tuple[str, ...] = FEATURE_NAMES
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        if not self.rows:
            raise ValidationError("dataset must be nonempty")
        if self.schema != FEATURE_NAMES:
            raise ValidationError("dataset schema does not match the feature schema")

    def histogram(self) -> dict[MaintenanceLabel, int]:
        counts = {label: 0 for label in LABEL_ORDER}
        for _, label in self.rows:
            counts[label] += 1
        return counts

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, y) with y as indices into LABEL_ORDER."""
        x = np.stack([fv.to_array() for fv, _ in self.rows])
        y = np.array([LABEL_ORDER.index(label) for _, label in self.rows], dtype=int)
        return x, y


def label_dataset(
    vectors: list[FeatureVector], thresholds: LabelingThresholds = DEFAULT_THRESHOLDS
) -> LabeledDataset:
    """Pair each vector with its strategy label."""
    if not vectors:
        raise ValidationError("cannot label an empty list of vectors")
    rows = tuple((fv, apply_labeling_strategy(fv, thresholds)) for fv in vectors)
    return LabeledDataset(rows=rows)


@dataclass(frozen=True)
class LabelDistribution:
    """Per-class probabilities; argmax ties break in LABEL_ORDER."""

    probabilities: tuple[float, ...]  # aligned with LABEL_ORDER

    def __post_init__(self):
        if len(self.probabilities) != len(LABEL_ORDER):
            raise ValidationError("distribution must cover all four labels")
        if any(p < 0 or p > 1 for p in self.probabilities):
            raise ValidationError("probabilities must lie in [0, 1]")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ValidationError("probabilities must sum to 1")

    def probability(self, label: MaintenanceLabel) -> float:
        return self.probabilities[LABEL_ORDER.index(label)]

    def argmax(self) -> MaintenanceLabel:
        best = max(self.probabilities)
        for label, p in zip(LABEL_ORDER, self.probabilities):
            if p == best:
                return label
        raise AssertionError("unreachable")

    @classmethod
    def point_mass(cls, label: MaintenanceLabel) -> "LabelDistribution":
        return cls(tuple(1.0 if lab is label else 0.0 for lab in LABEL_ORDER))

    def to_dict(self) -> dict[str, float]:
        return {label.value: p for label, p in zip(LABEL_ORDER, self.probabilities)}


class RuleBasedClassifier:
    """Classifier facade over the labeling rules (the CLI's --rules-only mode)."""

    schema = FEATURE_NAMES

    def __init__(self, thresholds: LabelingThresholds = DEFAULT_THRESHOLDS):
        self.thresholds = thresholds

    def classify(self, features: FeatureVector) -> LabelDistribution:
        return LabelDistribution.point_mass(apply_labeling_strategy(features, self.thresholds))
