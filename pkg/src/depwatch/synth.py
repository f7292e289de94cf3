"""Deterministic synthetic ecosystems for evaluation and fixtures.

Each generated library gets an intended maintenance label and an activity
trajectory engineered to satisfy that label's rule guard at the reference
date; the generator verifies this via the labeling strategy itself and fails
loudly on any mismatch, so intended labels double as ground truth. Edges form
a random DAG (index-ordered), popularity tiers drive the star counts, and the
same seed reproduces every output file byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .activity import ActivityTimeSeries, RepoRef, WEEK, WeekBucket, monday_of
from .canon import canonical_json_bytes
from .depgraph import (
    DependencySnapshot,
    LibraryId,
    LibraryRecord,
    SNAPSHOT_FORMAT_VERSION,
    serialize_snapshot,
)
from .errors import ValidationError
from .features import (
    LABEL_ORDER,
    MaintenanceLabel,
    apply_labeling_strategy,
    compute_features,
)
from .providers import OfflineStore

HISTORY_WEEKS = 160
DEFAULT_AS_OF = date(2024, 1, 1)  # a Monday

_STAR_RANGES = {"low": (0, 51), "med": (51, 1001), "high": (1001, 50001)}
_COMMIT_RATES = {"low": (1, 4), "med": (3, 9), "high": (8, 21)}
_POOL_SIZES = {"low": (1, 3), "med": (2, 6), "high": (4, 11)}


@dataclass(frozen=True)
class SyntheticEcosystem:
    snapshot: DependencySnapshot
    series: dict[LibraryId, ActivityTimeSeries]
    truth: dict[LibraryId, MaintenanceLabel]
    as_of: date
    seed: int

    def write(self, out_dir: str | Path) -> Path:
        """Write snapshot.json, store/, truth.json, dataset.json, meta.json."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "snapshot.json").write_bytes(serialize_snapshot(self.snapshot))
        store = OfflineStore(out / "store")
        for lib in sorted(self.series, key=lambda l: l.sort_key):
            store.save(self.series[lib])
        truth_doc = {
            "as_of": self.as_of.isoformat(),
            "labels": {str(lib): label.value for lib, label in self.truth.items()},
        }
        (out / "truth.json").write_bytes(canonical_json_bytes(truth_doc))
        rows = []
        for lib in sorted(self.series, key=lambda l: l.sort_key):
            fv = compute_features(self.series[lib], self.as_of)
            rows.append({"features": fv.to_dict(), "label": self.truth[lib].value})
        (out / "dataset.json").write_bytes(canonical_json_bytes({"schema_version": "1", "rows": rows}))
        meta = {"seed": self.seed, "n_libraries": len(self.series), "as_of": self.as_of.isoformat()}
        (out / "meta.json").write_bytes(canonical_json_bytes(meta))
        return out


def _allocate(n: int, mix, what: str) -> list[int]:
    """Largest-remainder allocation of n items to len(mix) buckets."""
    shares = [float(m) for m in mix]
    if any(s < 0 for s in shares) or abs(sum(shares) - 1.0) > 1e-9:
        raise ValidationError(f"{what} mix must be nonnegative and sum to 1, got {mix}")
    raw = [s * n for s in shares]
    counts = [int(r) for r in raw]
    remainders = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in remainders[: n - sum(counts)]:
        counts[i] += 1
    return counts


def _trajectory(
    rng: np.random.Generator, label: MaintenanceLabel, tier: str
) -> tuple[list[int], int, dict]:
    """Weekly commit counts (oldest first), cutoff in weeks-ago, label extras."""
    lo, hi = _COMMIT_RATES[tier]
    rate = float(rng.integers(lo, hi))
    extras: dict = {"archived_weeks_ago": None, "deprecated": False, "stable": False, "responsive": None}
    if label is MaintenanceLabel.ACTIVE:
        cutoff = 0
        extras["responsive"] = bool(rng.random() < 0.8)
    elif label is MaintenanceLabel.DORMANT:
        cutoff = int(rng.integers(14, 48))  # 98..329 days since last commit
        extras["responsive"] = bool(rng.random() < 0.5)
    elif label is MaintenanceLabel.FEATURE_COMPLETE:
        cutoff = int(rng.integers(56, 111))  # gone quiet over a year ago
        if rng.random() < 0.5:
            extras["stable"] = True
            extras["responsive"] = bool(rng.random() < 0.5)
        else:
            extras["responsive"] = True  # community still answers issues
    else:  # INACTIVE
        variant = int(rng.integers(0, 3))
        cutoff = int(rng.integers(56, 111))
        extras["responsive"] = False
        if variant == 0:
            extras["archived_weeks_ago"] = int(rng.integers(1, cutoff + 1))
        elif variant == 1:
            extras["deprecated"] = True
        # variant 2: just dead and unresponsive

    commits = []
    for i in range(HISTORY_WEEKS):
        weeks_ago = HISTORY_WEEKS - 1 - i
        if weeks_ago < cutoff:
            commits.append(0)
        else:
            commits.append(int(rng.poisson(rate)))
    # the boundary week anchors days_since_last_commit; it must be active
    commits[HISTORY_WEEKS - 1 - cutoff] = max(1, commits[HISTORY_WEEKS - 1 - cutoff])
    if label is MaintenanceLabel.ACTIVE:
        commits[-1] = max(1, commits[-1])
    return commits, cutoff, extras


def _series_for(
    rng: np.random.Generator,
    repo: RepoRef,
    label: MaintenanceLabel,
    tier: str,
    as_of: date,
) -> ActivityTimeSeries:
    commits, cutoff, extras = _trajectory(rng, label, tier)
    first_week = as_of - (HISTORY_WEEKS - 1) * WEEK
    created_at = first_week
    stars = int(rng.integers(*_STAR_RANGES[tier]))
    pool = [f"dev{j:02d}" for j in range(int(rng.integers(*_POOL_SIZES[tier])))]
    issue_rate = max(0.2, stars / 400.0)

    weeks = []
    releases = []
    for i, n_commits in enumerate(commits):
        week_start = first_week + i * WEEK
        weeks_ago = HISTORY_WEEKS - 1 - i
        authors: dict[str, int] = {}
        if n_commits > 0:
            k = int(min(len(pool), 1 + rng.integers(0, max(1, len(pool)))))
            k = min(k, n_commits)
            chosen = sorted(rng.choice(len(pool), size=k, replace=False))
            authors = {pool[j]: 1 for j in chosen}
            remaining = n_commits - k
            for _ in range(remaining):
                authors[pool[chosen[int(rng.integers(0, k))]]] += 1
        community_alive = weeks_ago >= cutoff or (
            label is MaintenanceLabel.FEATURE_COMPLETE and extras["responsive"]
        )
        opened = int(rng.poisson(issue_rate)) if community_alive else 0
        closed = int(rng.binomial(opened, 0.8)) if opened else 0
        weeks.append(
            WeekBucket(
                week_start=week_start,
                commits=n_commits,
                active_contributors=len(authors),
                issues_opened=opened,
                issues_closed=closed,
                stars_total=stars,
                commit_authors=tuple(sorted(authors.items())) if authors else None,
            )
        )
        if n_commits > 0 and rng.random() < 0.1:
            releases.append(week_start + timedelta(days=int(rng.integers(0, 5))))

    if extras["responsive"]:
        samples = tuple(float(h) for h in np.sort(rng.uniform(2.0, 300.0, size=int(rng.integers(5, 15)))))
    elif extras["responsive"] is False and rng.random() < 0.5:
        samples = tuple(float(h) for h in np.sort(rng.uniform(400.0, 2000.0, size=int(rng.integers(1, 5)))))
    else:
        samples = ()

    archived_at = None
    if extras["archived_weeks_ago"] is not None:
        archived_at = as_of - extras["archived_weeks_ago"] * WEEK

    return ActivityTimeSeries(
        repo=repo,
        created_at=created_at,
        weeks=tuple(weeks),
        releases=tuple(releases),
        issue_response_samples_hours=samples,
        archived_at=archived_at,
        readme_deprecated=extras["deprecated"],
        readme_stable_declared=extras["stable"],
    )


def generate_synthetic_ecosystem(
    seed: int,
    n_libraries: int,
    *,
    popularity_mix=(1 / 3, 1 / 3, 1 / 3),
    label_mix=(0.25, 0.25, 0.25, 0.25),
    edge_density: float = 0.08,
    as_of: date = DEFAULT_AS_OF,
) -> SyntheticEcosystem:
    """Build a labeled ecosystem: snapshot, per-repo activity, ground truth."""
    if n_libraries < 1:
        raise ValidationError("n_libraries must be >= 1")
    if not (0.0 <= edge_density <= 1.0):
        raise ValidationError("edge_density must lie in [0, 1]")
    as_of = monday_of(as_of)
    label_counts = _allocate(n_libraries, label_mix, "label")
    tier_counts = _allocate(n_libraries, popularity_mix, "popularity")

    rng = np.random.default_rng(seed)
    labels: list[MaintenanceLabel] = []
    for label, count in zip(LABEL_ORDER, label_counts):
        labels.extend([label] * count)
    tiers: list[str] = []
    for tier, count in zip(("low", "med", "high"), tier_counts):
        tiers.extend([tier] * count)
    rng.shuffle(labels)  # type: ignore[arg-type]
    rng.shuffle(tiers)  # type: ignore[arg-type]

    records = []
    series: dict[LibraryId, ActivityTimeSeries] = {}
    truth: dict[LibraryId, MaintenanceLabel] = {}
    libs: list[LibraryId] = []
    for i in range(n_libraries):
        version = f"{rng.integers(0, 5)}.{rng.integers(0, 10)}.{rng.integers(0, 10)}"
        lib = LibraryId("synth", f"lib{i:03d}", version)
        repo = RepoRef(host="forge.example", owner=f"org{i % 7:02d}", name=f"lib{i:03d}")
        activity = _series_for(rng, repo, labels[i], tiers[i], as_of)
        observed = apply_labeling_strategy(compute_features(activity, as_of))
        if observed is not labels[i]:
            raise RuntimeError(
                f"generator bug: {lib} intended {labels[i].value} but labels as {observed.value}"
            )
        libs.append(lib)
        series[lib] = activity
        truth[lib] = labels[i]
        records.append((lib, repo))

    deps: dict[LibraryId, list[LibraryId]] = {lib: [] for lib in libs}
    has_parent: set[LibraryId] = set()
    for i in range(n_libraries):
        for j in range(i + 1, n_libraries):
            if rng.random() < edge_density:
                deps[libs[i]].append(libs[j])
                has_parent.add(libs[j])

    snapshot = DependencySnapshot(
        format_version=SNAPSHOT_FORMAT_VERSION,
        ecosystem="synth",
        libraries=tuple(
            LibraryRecord(id=lib, repo=repo, direct_deps=tuple(deps[lib])) for lib, repo in records
        ),
        roots=tuple(lib for lib in libs if lib not in has_parent),
    )
    return SyntheticEcosystem(snapshot=snapshot, series=series, truth=truth, as_of=as_of, seed=seed)
