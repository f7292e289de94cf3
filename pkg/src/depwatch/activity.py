"""Repository activity histories: weekly buckets, store schema, event bucketing.

Weeks are Monday-start UTC buckets. A series is contiguous: every week between
its first and last bucket is present, zero-filled when nothing happened.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

from .errors import ValidationError

WEEK = timedelta(days=7)


def monday_of(day: date) -> date:
    """The Monday on or before ``day``."""
    return day - timedelta(days=day.weekday())


@dataclass(frozen=True)
class RepoRef:
    """A repository coordinate on some forge: host/owner/name."""

    host: str
    owner: str
    name: str

    def __post_init__(self):
        for label, value in (("host", self.host), ("owner", self.owner), ("name", self.name)):
            if not value:
                raise ValidationError(f"RepoRef {label} must be nonempty")

    def __str__(self) -> str:
        return f"{self.host}/{self.owner}/{self.name}"


@dataclass(frozen=True)
class WeekBucket:
    """One week of repository activity.

    ``commit_authors`` (author id -> commits that week) is optional detail;
    when present it must agree with the aggregate counts.
    """

    week_start: date
    commits: int = 0
    active_contributors: int = 0
    issues_opened: int = 0
    issues_closed: int = 0
    stars_total: int = 0
    commit_authors: tuple[tuple[str, int], ...] | None = None

    def __post_init__(self):
        if self.week_start.weekday() != 0:
            raise ValidationError(f"week_start {self.week_start} is not a Monday")
        for label in ("commits", "active_contributors", "issues_opened", "issues_closed", "stars_total"):
            if getattr(self, label) < 0:
                raise ValidationError(f"{label} must be >= 0 in week {self.week_start}")
        if self.commit_authors is not None:
            authors = dict(self.commit_authors)
            if len(authors) != len(self.commit_authors):
                raise ValidationError(f"duplicate commit author in week {self.week_start}")
            if any(n <= 0 for n in authors.values()):
                raise ValidationError(f"commit author counts must be positive in week {self.week_start}")
            if sum(authors.values()) != self.commits:
                raise ValidationError(f"commit_authors do not sum to commits in week {self.week_start}")
            if len(authors) != self.active_contributors:
                raise ValidationError(f"active_contributors != len(commit_authors) in week {self.week_start}")

    @property
    def authors(self) -> dict[str, int] | None:
        return dict(self.commit_authors) if self.commit_authors is not None else None


@dataclass(frozen=True)
class ActivityTimeSeries:
    """Weekly activity history for one repository."""

    repo: RepoRef
    created_at: date
    weeks: tuple[WeekBucket, ...]
    releases: tuple[date, ...] = ()
    issue_response_samples_hours: tuple[float, ...] = ()
    archived_at: date | None = None
    readme_deprecated: bool = False
    readme_stable_declared: bool = False

    def __post_init__(self):
        for prev, cur in zip(self.weeks, self.weeks[1:]):
            if cur.week_start != prev.week_start + WEEK:
                raise ValidationError(
                    f"weeks must be contiguous 7-day steps: {prev.week_start} -> {cur.week_start}"
                )
        if self.archived_at is not None and self.archived_at < self.created_at:
            raise ValidationError("archived_at precedes created_at")
        if any(h < 0 for h in self.issue_response_samples_hours):
            raise ValidationError("issue response samples must be >= 0 hours")

    def clamped(self, start: date | None, end: date) -> "ActivityTimeSeries":
        """Restrict buckets to [monday(start), monday(end)], keeping contiguity."""
        lo = monday_of(start) if start is not None else None
        hi = monday_of(end)
        weeks = tuple(w for w in self.weeks if (lo is None or w.week_start >= lo) and w.week_start <= hi)
        return ActivityTimeSeries(
            repo=self.repo,
            created_at=self.created_at,
            weeks=weeks,
            releases=self.releases,
            issue_response_samples_hours=self.issue_response_samples_hours,
            archived_at=self.archived_at,
            readme_deprecated=self.readme_deprecated,
            readme_stable_declared=self.readme_stable_declared,
        )


def series_to_dict(series: ActivityTimeSeries) -> dict:
    """The offline-store JSON document for one repo (schema version 1)."""
    weeks = []
    for w in series.weeks:
        entry: dict = {
            "week_start": w.week_start.isoformat(),
            "commits": w.commits,
            "active_contributors": w.active_contributors,
            "issues_opened": w.issues_opened,
            "issues_closed": w.issues_closed,
            "stars_total": w.stars_total,
        }
        if w.commit_authors is not None:
            entry["commit_authors"] = {a: n for a, n in sorted(w.commit_authors)}
        weeks.append(entry)
    return {
        "repo": {"host": series.repo.host, "owner": series.repo.owner, "name": series.repo.name},
        "created_at": series.created_at.isoformat(),
        "weeks": weeks,
        "releases": [d.isoformat() for d in series.releases],
        "issue_response_samples_hours": list(series.issue_response_samples_hours),
        "archived_at": series.archived_at.isoformat() if series.archived_at else None,
        "readme_deprecated": series.readme_deprecated,
        "readme_stable_declared": series.readme_stable_declared,
    }


def series_from_dict(doc: dict) -> ActivityTimeSeries:
    """Parse an offline-store document; raises ValidationError on bad shape."""
    try:
        repo = RepoRef(**doc["repo"])
        weeks = []
        for entry in doc["weeks"]:
            authors = entry.get("commit_authors")
            weeks.append(
                WeekBucket(
                    week_start=date.fromisoformat(entry["week_start"]),
                    commits=int(entry["commits"]),
                    active_contributors=int(entry["active_contributors"]),
                    issues_opened=int(entry["issues_opened"]),
                    issues_closed=int(entry["issues_closed"]),
                    stars_total=int(entry["stars_total"]),
                    commit_authors=tuple(sorted((a, int(n)) for a, n in authors.items()))
                    if authors is not None
                    else None,
                )
            )
        archived = doc.get("archived_at")
        return ActivityTimeSeries(
            repo=repo,
            created_at=date.fromisoformat(doc["created_at"]),
            weeks=tuple(weeks),
            releases=tuple(date.fromisoformat(d) for d in doc["releases"]),
            issue_response_samples_hours=tuple(float(h) for h in doc["issue_response_samples_hours"]),
            archived_at=date.fromisoformat(archived) if archived else None,
            readme_deprecated=bool(doc["readme_deprecated"]),
            readme_stable_declared=bool(doc["readme_stable_declared"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed activity document: {exc}") from exc


@dataclass(frozen=True)
class CommitEvent:
    day: date
    author: str


@dataclass(frozen=True)
class IssueEvent:
    opened: date
    closed: date | None = None
    first_response_hours: float | None = None


def build_series(
    repo: RepoRef,
    *,
    created_at: date,
    commits: list[CommitEvent],
    issues: list[IssueEvent],
    releases: list[date],
    stars_total: int,
    end: date,
    start: date | None = None,
    archived_at: date | None = None,
    readme_deprecated: bool = False,
    readme_stable_declared: bool = False,
) -> ActivityTimeSeries:
    """Bucket raw forge events into a contiguous weekly series ending at ``end``.

    The same bucketing backs the live provider and the offline-store writers,
    so both ingestion paths agree on identical events. Stars history is not
    reconstructed; every bucket carries the current total.
    """
    first = monday_of(max(created_at, start) if start is not None else created_at)
    last = monday_of(end)
    if last < first:
        raise ValidationError(f"window end {end} precedes repository history start {first}")

    per_week_authors: dict[date, dict[str, int]] = {}
    for ev in commits:
        wk = monday_of(ev.day)
        if first <= wk <= last:
            bucket = per_week_authors.setdefault(wk, {})
            bucket[ev.author] = bucket.get(ev.author, 0) + 1
    opened: dict[date, int] = {}
    closed: dict[date, int] = {}
    for issue in issues:
        wk = monday_of(issue.opened)
        if first <= wk <= last:
            opened[wk] = opened.get(wk, 0) + 1
        if issue.closed is not None:
            wk = monday_of(issue.closed)
            if first <= wk <= last:
                closed[wk] = closed.get(wk, 0) + 1

    weeks = []
    wk = first
    while wk <= last:
        authors = per_week_authors.get(wk)
        weeks.append(
            WeekBucket(
                week_start=wk,
                commits=sum(authors.values()) if authors else 0,
                active_contributors=len(authors) if authors else 0,
                issues_opened=opened.get(wk, 0),
                issues_closed=closed.get(wk, 0),
                stars_total=stars_total,
                commit_authors=tuple(sorted(authors.items())) if authors else None,
            )
        )
        wk += WEEK

    samples = tuple(
        float(i.first_response_hours) for i in issues if i.first_response_hours is not None
    )
    return ActivityTimeSeries(
        repo=repo,
        created_at=created_at,
        weeks=tuple(weeks),
        releases=tuple(sorted(d for d in releases if d <= end)),
        issue_response_samples_hours=samples,
        archived_at=archived_at,
        readme_deprecated=readme_deprecated,
        readme_stable_declared=readme_stable_declared,
    )
