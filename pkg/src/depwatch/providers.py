"""Activity providers: the offline store and the live forge API client.

Offline store layout: ``<store>/<host>/<owner>/<name>.activity.json``, one
document per repo in the schema of :func:`depwatch.activity.series_to_dict`.

Live provider endpoints (all relative to the configured base URL, JSON):

    GET /repos/{host}/{owner}/{name}            -> repo metadata
    GET /repos/{host}/{owner}/{name}/commits    -> {"items": [{"date", "author"}], "next_page"}
    GET /repos/{host}/{owner}/{name}/issues     -> {"items": [{"opened_at", "closed_at", "first_response_hours"}], "next_page"}
    GET /repos/{host}/{owner}/{name}/releases   -> {"items": ["YYYY-MM-DD", ...]}

Paginated endpoints take ?page=N and report the next page (or null). A bearer
token is read from the DEPWATCH_TOKEN environment variable. HTTP 429 answers
are retried after the server's Retry-After.
"""

from __future__ import annotations

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Protocol

import requests

from .activity import (
    ActivityTimeSeries,
    CommitEvent,
    IssueEvent,
    RepoRef,
    WeekBucket,
    build_series,
    monday_of,
    series_from_dict,
    series_to_dict,
    WEEK,
)
from .errors import NotFoundError, RateLimitedError, TransportError, ValidationError

TOKEN_ENV_VAR = "DEPWATCH_TOKEN"


@dataclass(frozen=True)
class DateRange:
    """Half-open in spirit, inclusive in weeks: buckets with week_start <= end."""

    start: date | None
    end: date


class ActivityProvider(Protocol):
    def fetch(self, repo: RepoRef, window: DateRange) -> ActivityTimeSeries: ...


def fetch_activity(provider: ActivityProvider, repo: RepoRef, window: DateRange) -> ActivityTimeSeries:
    """Contiguous weekly series covering the window (zero counts where quiet)."""
    return provider.fetch(repo, window)


def fetch_many(
    provider: ActivityProvider,
    repos: list[RepoRef],
    window: DateRange,
    max_workers: int = 4,
) -> dict[RepoRef, ActivityTimeSeries | Exception]:
    """Fetch several repos concurrently; failures come back as exception values."""
    results: dict[RepoRef, ActivityTimeSeries | Exception] = {}
    if not repos:
        return results
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        futures = {repo: pool.submit(provider.fetch, repo, window) for repo in repos}
        for repo, future in futures.items():
            try:
                results[repo] = future.result()
            except Exception as exc:  # surfaced per-repo, never aborts the batch
                results[repo] = exc
    return results


class OfflineStore:
    """Filesystem-backed activity source; also the writer the generator uses."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path_for(self, repo: RepoRef) -> Path:
        return self.root / repo.host / repo.owner / f"{repo.name}.activity.json"

    def fetch(self, repo: RepoRef, window: DateRange) -> ActivityTimeSeries:
        path = self.path_for(repo)
        if not path.is_file():
            raise NotFoundError(f"no activity document for {repo} under {self.root}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        series = series_from_dict(doc)
        return _cover_window(series, window)

    def save(self, series: ActivityTimeSeries) -> Path:
        path = self.path_for(series.repo)
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = series_to_dict(series)
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def _cover_window(series: ActivityTimeSeries, window: DateRange) -> ActivityTimeSeries:
    """Clamp to the window and pad with zero weeks so it is fully covered.

    Stored weeks never start before the repo was created. Stars carry forward
    from the last stored bucket (they are a running total, not a rate).
    """
    end = monday_of(window.end)
    start = monday_of(max(window.start, series.created_at)) if window.start else monday_of(series.created_at)
    if end < start:
        raise ValidationError(f"window end {window.end} precedes its start {window.start}")

    stored = {w.week_start: w for w in series.weeks if start <= w.week_start <= end}
    last_known_stars = 0
    for w in series.weeks:
        if w.week_start <= end:
            last_known_stars = w.stars_total
    weeks = []
    wk = start
    while wk <= end:
        bucket = stored.get(wk)
        if bucket is None:
            stars = last_known_stars if series.weeks and wk > series.weeks[-1].week_start else 0
            bucket = WeekBucket(week_start=wk, stars_total=stars)
        weeks.append(bucket)
        wk += WEEK
    return ActivityTimeSeries(
        repo=series.repo,
        created_at=series.created_at,
        weeks=tuple(weeks),
        releases=tuple(d for d in series.releases if d <= window.end),
        issue_response_samples_hours=series.issue_response_samples_hours,
        archived_at=series.archived_at,
        readme_deprecated=series.readme_deprecated,
        readme_stable_declared=series.readme_stable_declared,
    )


class _TokenBucket:
    """Simple rate limiter: at most ``rate`` acquisitions per second."""

    def __init__(self, rate: float | None):
        self.interval = 1.0 / rate if rate else 0.0
        self._lock = threading.Lock()
        self._next_free = 0.0

    def acquire(self) -> None:
        if not self.interval:
            return
        with self._lock:
            now = time.monotonic()
            wait = self._next_free - now
            self._next_free = max(now, self._next_free) + self.interval
        if wait > 0:
            time.sleep(wait)


class ForgeApiClient:
    """REST client for the activity API sketched in the module docstring."""

    def __init__(
        self,
        base_url: str,
        token: str | None = None,
        *,
        requests_per_second: float | None = None,
        max_retries: int = 3,
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.token = token if token is not None else os.environ.get(TOKEN_ENV_VAR)
        self.max_retries = max_retries
        self.timeout = timeout
        self._bucket = _TokenBucket(requests_per_second)
        self._session = session or requests.Session()

    def _get(self, path: str, params: dict | None = None) -> dict:
        url = f"{self.base_url}{path}"
        headers = {"Accept": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        attempts = 0
        while True:
            self._bucket.acquire()
            try:
                resp = self._session.get(url, params=params, headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                raise TransportError(f"GET {url} failed: {exc}") from exc
            if resp.status_code == 404:
                raise NotFoundError(f"GET {url} -> 404")
            if resp.status_code == 429:
                retry_after = float(resp.headers.get("Retry-After", "1"))
                attempts += 1
                if attempts > self.max_retries:
                    raise RateLimitedError(f"GET {url} rate limited", retry_after=retry_after)
                time.sleep(retry_after)
                continue
            if resp.status_code >= 400:
                raise TransportError(f"GET {url} -> HTTP {resp.status_code}")
            try:
                return resp.json()
            except ValueError as exc:
                raise TransportError(f"GET {url} returned invalid JSON") from exc

    def _paginate(self, path: str) -> list[dict]:
        items: list[dict] = []
        page: int | None = 1
        while page is not None:
            doc = self._get(path, params={"page": page})
            items.extend(doc.get("items", []))
            page = doc.get("next_page")
        return items

    def fetch(self, repo: RepoRef, window: DateRange) -> ActivityTimeSeries:
        prefix = f"/repos/{repo.host}/{repo.owner}/{repo.name}"
        meta = self._get(prefix)
        commits = [
            CommitEvent(day=date.fromisoformat(c["date"]), author=c["author"])
            for c in self._paginate(f"{prefix}/commits")
        ]
        issues = [
            IssueEvent(
                opened=date.fromisoformat(i["opened_at"]),
                closed=date.fromisoformat(i["closed_at"]) if i.get("closed_at") else None,
                first_response_hours=i.get("first_response_hours"),
            )
            for i in self._paginate(f"{prefix}/issues")
        ]
        releases = [date.fromisoformat(d) for d in self._get(f"{prefix}/releases").get("items", [])]
        archived = meta.get("archived_at")
        return build_series(
            repo,
            created_at=date.fromisoformat(meta["created_at"]),
            commits=[c for c in commits if c.day <= window.end],
            issues=[i for i in issues if i.opened <= window.end],
            releases=releases,
            stars_total=int(meta.get("stars_total", 0)),
            end=window.end,
            start=window.start,
            archived_at=date.fromisoformat(archived) if archived else None,
            readme_deprecated=bool(meta.get("readme_deprecated", False)),
            readme_stable_declared=bool(meta.get("readme_stable_declared", False)),
        )
