from __future__ import annotations

from datetime import date
from pathlib import Path

import pytest

from depwatch.activity import WEEK, ActivityTimeSeries, RepoRef, WeekBucket
from depwatch.depgraph import DependencyGraph, LibraryId

FIXTURES = Path(__file__).parent / "fixtures"
AS_OF = date(2024, 1, 1)  # Monday; matches the committed fixtures

# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def lib(name: str, ecosystem: str = "npm", version: str | None = None) -> LibraryId:
    return LibraryId(ecosystem, name, version)


def graph_of(*edges: tuple[str, str], extra_nodes: tuple[str, ...] = ()) -> DependencyGraph:
    """Small-graph builder: graph_of(('a','b'), ('b','c'))."""
    names = {n for e in edges for n in e} | set(extra_nodes)
    return DependencyGraph([lib(n) for n in sorted(names)], [(lib(a), lib(b)) for a, b in edges])


def make_series(
    commits_by_week: list[int],
    *,
    end: date = AS_OF,
    name: str = "repo",
    stars: int = 100,
    authors_per_week: list[dict[str, int]] | None = None,
    issues_opened: list[int] | None = None,
    issues_closed: list[int] | None = None,
    releases: tuple[date, ...] = (),
    samples: tuple[float, ...] = (),
    archived_at: date | None = None,
    readme_deprecated: bool = False,
    readme_stable_declared: bool = False,
    created_at: date | None = None,
) -> ActivityTimeSeries:
    """Weekly series whose LAST bucket starts at ``end`` (must be a Monday)."""
    n = len(commits_by_week)
    first = end - (n - 1) * WEEK
    weeks = []
    for i, commits in enumerate(commits_by_week):
        authors = None
        if authors_per_week is not None and authors_per_week[i]:
            authors = tuple(sorted(authors_per_week[i].items()))
        weeks.append(
            WeekBucket(
                week_start=first + i * WEEK,
                commits=commits,
                active_contributors=len(authors) if authors else (1 if commits else 0),
                issues_opened=issues_opened[i] if issues_opened else 0,
                issues_closed=issues_closed[i] if issues_closed else 0,
                stars_total=stars,
                commit_authors=authors,
            )
        )
    return ActivityTimeSeries(
        repo=RepoRef(host="test.example", owner="own", name=name),
        created_at=created_at or first,
        weeks=tuple(weeks),
        releases=releases,
        issue_response_samples_hours=samples,
        archived_at=archived_at,
        readme_deprecated=readme_deprecated,
        readme_stable_declared=readme_stable_declared,
    )
