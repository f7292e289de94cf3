"""Forecasting weekly activity features and classifying the predicted future.

Four deterministic methods over weekly series:

  naive_last    carry the last observation forward
  linear_trend  ordinary least squares on (week index, value)
  ses           simple exponential smoothing, level only
  holt          exponential smoothing with additive trend

Smoothing constants come from a grid search over {0.1, ..., 0.9} minimizing
in-sample one-step squared error; ties resolve to the smallest constants.
90% intervals are Gaussian: point +/- 1.645 * residual_sd * sqrt(h). They are
a documented approximation for ranking confidence, not a calibrated bound.

A horizon of m months is m*30 days, i.e. ceil(m*30/7) weekly steps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .activity import WEEK, ActivityTimeSeries, WeekBucket
from .errors import FitError, ValidationError
from .features import (
    DEFAULT_THRESHOLDS,
    FeatureVector,
    LabelDistribution,
    LabelingThresholds,
    MaintenanceLabel,
    compute_features,
)

HORIZON_MONTHS = (1, 3, 6, 9, 12)
MIN_FIT_OBSERVATIONS = 8
Z_90 = 1.645
_GRID = tuple(i / 10 for i in range(1, 10))

METHODS = ("naive_last", "linear_trend", "ses", "holt")


@dataclass(frozen=True)
class Horizon:
    months: int

    def __post_init__(self):
        if self.months not in HORIZON_MONTHS:
            raise ValidationError(f"horizon must be one of {HORIZON_MONTHS}, got {self.months}")

    @property
    def days(self) -> int:
        return self.months * 30

    @property
    def steps(self) -> int:
        return math.ceil(self.days / 7)


@dataclass(frozen=True)
class Forecaster:
    """A fitted model for one weekly series."""

    method: str
    n_obs: int
    residual_sd: float
    level: float = 0.0
    trend: float = 0.0
    intercept: float = 0.0
    slope: float = 0.0
    alpha: float | None = None
    beta: float | None = None


@dataclass(frozen=True)
class ForecastEntry:
    """Point forecast with its 90% interval for one horizon."""

    steps: int
    point: float
    lower: float
    upper: float


def _ses_run(y: np.ndarray, alphas: np.ndarray):
    """Level recursion for every alpha at once; returns (levels, sses, errors)."""
    level = np.full(len(alphas), y[0])
    sse = np.zeros(len(alphas))
    errors = np.empty((len(y) - 1, len(alphas)))
    for t in range(1, len(y)):
        e = y[t] - level
        errors[t - 1] = e
        sse += e * e
        level = alphas * y[t] + (1 - alphas) * level
    return level, sse, errors


def _holt_run(y: np.ndarray, alphas: np.ndarray, betas: np.ndarray):
    """Level/trend recursion for every (alpha, beta) pair at once."""
    level = np.full(len(alphas), y[0])
    trend = np.full(len(alphas), y[1] - y[0])
    sse = np.zeros(len(alphas))
    errors = np.empty((len(y) - 1, len(alphas)))
    for t in range(1, len(y)):
        predicted = level + trend
        e = y[t] - predicted
        errors[t - 1] = e
        sse += e * e
        new_level = alphas * y[t] + (1 - alphas) * predicted
        trend = betas * (new_level - level) + (1 - betas) * trend
        level = new_level
    return level, trend, sse, errors


def _sd(errors: np.ndarray) -> float:
    if len(errors) < 2:
        return 0.0
    return float(np.std(errors, ddof=1))


def fit(values, method: str) -> Forecaster:
    """Fit one method to a weekly series of at least 8 finite observations."""
    y = np.asarray(list(values), dtype=float)
    if len(y) < MIN_FIT_OBSERVATIONS:
        raise FitError(f"need >= {MIN_FIT_OBSERVATIONS} observations, got {len(y)}")
    if not np.all(np.isfinite(y)):
        raise FitError("series contains non-finite values")
    n = len(y)

    if method == "naive_last":
        errors = np.diff(y)
        return Forecaster(method=method, n_obs=n, residual_sd=_sd(errors), level=float(y[-1]))

    if method == "linear_trend":
        t = np.arange(n, dtype=float)
        slope, intercept = np.polyfit(t, y, 1)
        residuals = y - (intercept + slope * t)
        sse = float(np.sum(residuals**2))
        sd = math.sqrt(sse / (n - 2)) if n > 2 else 0.0
        return Forecaster(
            method=method,
            n_obs=n,
            residual_sd=sd,
            intercept=float(intercept),
            slope=float(slope),
            level=float(intercept + slope * (n - 1)),
        )

    if method == "ses":
        alphas = np.array(_GRID)
        levels, sses, errors = _ses_run(y, alphas)
        at = int(np.argmin(sses))  # first minimum: smallest alpha wins ties
        return Forecaster(
            method=method, n_obs=n, residual_sd=_sd(errors[:, at]),
            level=float(levels[at]), alpha=float(alphas[at]),
        )

    if method == "holt":
        if np.ptp(y) == 0.0:
            # zero-variance series: trend is meaningless; behave like ses
            return Forecaster(
                method=method, n_obs=n, residual_sd=0.0, level=float(y[0]), trend=0.0,
                alpha=_GRID[0], beta=_GRID[0],
            )
        # grid ordered alpha-major so argmin ties resolve to smallest constants
        alphas = np.repeat(_GRID, len(_GRID))
        betas = np.tile(_GRID, len(_GRID))
        levels, trends, sses, errors = _holt_run(y, alphas, betas)
        at = int(np.argmin(sses))
        return Forecaster(
            method=method, n_obs=n, residual_sd=_sd(errors[:, at]),
            level=float(levels[at]), trend=float(trends[at]),
            alpha=float(alphas[at]), beta=float(betas[at]),
        )

    raise ValidationError(f"unknown forecasting method {method!r} (choose from {METHODS})")


def point_at_step(model: Forecaster, step: int) -> float:
    """h-step-ahead point forecast, unclamped."""
    if step < 1:
        raise ValidationError("step must be >= 1")
    if model.method == "naive_last":
        return model.level
    if model.method == "linear_trend":
        return model.intercept + model.slope * (model.n_obs - 1 + step)
    if model.method == "ses":
        return model.level
    return model.level + step * model.trend  # holt


def predict(model: Forecaster, horizon: Horizon, *, nonnegative: bool = True) -> ForecastEntry:
    """Point and 90% interval at the horizon; count features clamp at zero."""
    h = horizon.steps
    point = point_at_step(model, h)
    width = Z_90 * model.residual_sd * math.sqrt(h)
    lower, upper = point - width, point + width
    if nonnegative:
        point, lower, upper = max(0.0, point), max(0.0, lower), max(0.0, upper)
    return ForecastEntry(steps=h, point=point, lower=lower, upper=upper)


@dataclass(frozen=True)
class BacktestMetrics:
    mae: float
    mape: float | None  # None when every actual was zero
    interval_hit_rate: float
    n_origins: int


def backtest(values, method: str, steps: int, *, min_fit: int = MIN_FIT_OBSERVATIONS) -> BacktestMetrics:
    """Rolling-origin evaluation: fit each prefix, score the h-step forecast.

    Requires len(series) >= min_fit + steps + 4 so several origins exist.
    Intervals are evaluated unclamped (the raw model bounds).
    """
    y = np.asarray(list(values), dtype=float)
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    if len(y) < min_fit + steps + 4:
        raise ValidationError(
            f"series too short for backtest: need >= {min_fit + steps + 4}, got {len(y)}"
        )
    abs_errors, pct_errors, hits = [], [], 0
    origins = range(min_fit, len(y) - steps + 1)
    for origin in origins:
        model = fit(y[:origin], method)
        point = point_at_step(model, steps)
        width = Z_90 * model.residual_sd * math.sqrt(steps)
        actual = y[origin + steps - 1]
        abs_errors.append(abs(actual - point))
        if actual != 0:
            pct_errors.append(abs(actual - point) / abs(actual))
        if point - width <= actual <= point + width:
            hits += 1
    return BacktestMetrics(
        mae=float(np.mean(abs_errors)),
        mape=float(np.mean(pct_errors)) if pct_errors else None,
        interval_hit_rate=hits / len(abs_errors),
        n_origins=len(abs_errors),
    )


_DYNAMIC_FIELDS = ("commits", "active_contributors", "issues_opened", "issues_closed")


def _visible_weeks(activity: ActivityTimeSeries, as_of: date) -> list[WeekBucket]:
    visible = [w for w in activity.weeks if w.week_start <= as_of]
    if len(visible) < MIN_FIT_OBSERVATIONS:
        raise FitError(
            f"need >= {MIN_FIT_OBSERVATIONS} observed weeks before {as_of}, got {len(visible)}"
        )
    return visible


def _fit_dynamics(visible: list[WeekBucket], method: str) -> dict[str, Forecaster]:
    return {
        name: fit([getattr(w, name) for w in visible], method) for name in _DYNAMIC_FIELDS
    }


def _extend_series(
    activity: ActivityTimeSeries,
    visible: list[WeekBucket],
    models: dict[str, Forecaster],
    future_as_of: date,
) -> ActivityTimeSeries:
    """History plus forecast weeks covering future_as_of.

    Weekly commits, contributors, and issue counts come from the fitted
    models, rounded to the nearest integer and clamped at zero. Stars carry
    forward; flags, releases, and response samples stay as observed.
    """
    last_week = visible[-1].week_start
    steps = math.ceil((future_as_of - last_week).days / 7)
    stars = visible[-1].stars_total
    future_weeks = [
        WeekBucket(
            week_start=last_week + (s * WEEK),
            stars_total=stars,
            **{
                name: max(0, round(point_at_step(models[name], s)))
                for name in _DYNAMIC_FIELDS
            },
        )
        for s in range(1, steps + 1)
    ]
    return ActivityTimeSeries(
        repo=activity.repo, created_at=activity.created_at,
        weeks=tuple(visible) + tuple(future_weeks),
        releases=activity.releases,
        issue_response_samples_hours=activity.issue_response_samples_hours,
        archived_at=activity.archived_at, readme_deprecated=activity.readme_deprecated,
        readme_stable_declared=activity.readme_stable_declared,
    )


def forecast_features(
    activity: ActivityTimeSeries,
    as_of: date,
    horizon: Horizon,
    *,
    method: str = "holt",
    thresholds: LabelingThresholds = DEFAULT_THRESHOLDS,
) -> FeatureVector:
    """The synthesized feature vector at as_of + horizon.

    Derived features are recomputed over the extended weekly series, so
    days_since_last_commit advances by the horizon when predicted activity
    rounds to zero and snaps to the newest predicted active week otherwise.
    """
    visible = _visible_weeks(activity, as_of)
    models = _fit_dynamics(visible, method)
    future_as_of = as_of + timedelta(days=horizon.days)
    extended = _extend_series(activity, visible, models, future_as_of)
    return compute_features(extended, future_as_of, thresholds)


def forecast_labels(
    activity: ActivityTimeSeries,
    model,
    horizons,
    as_of: date,
    *,
    method: str = "holt",
    thresholds: LabelingThresholds = DEFAULT_THRESHOLDS,
) -> dict[int, tuple[MaintenanceLabel, LabelDistribution]]:
    """Classify the forecast feature vector at each horizon.

    ``model`` is anything with a ``classify(FeatureVector) -> LabelDistribution``
    method (a trained forest or the rule-based classifier). The dynamic series
    are fitted once and extrapolated to every horizon.
    """
    visible = _visible_weeks(activity, as_of)
    models = _fit_dynamics(visible, method)
    out: dict[int, tuple[MaintenanceLabel, LabelDistribution]] = {}
    for months in horizons:
        horizon = months if isinstance(months, Horizon) else Horizon(months)
        extended = _extend_series(activity, visible, models, as_of + timedelta(days=horizon.days))
        fv = compute_features(extended, as_of + timedelta(days=horizon.days), thresholds)
        dist = model.classify(fv)
        out[horizon.months] = (dist.argmax(), dist)
    return out


def load_value_series(path: str | Path) -> list[float]:
    """Read a series fixture: JSON array of {"week_start", "value"} entries.

    Validates Monday-start contiguity and returns the values in order.
    """
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, list) or not doc:
        raise ValidationError("series fixture must be a nonempty JSON array")
    starts = [date.fromisoformat(entry["week_start"]) for entry in doc]
    for prev, cur in zip(starts, starts[1:]):
        if cur != prev + WEEK:
            raise ValidationError(f"series weeks not contiguous: {prev} -> {cur}")
    if starts[0].weekday() != 0:
        raise ValidationError("series must start on a Monday")
    return [float(entry["value"]) for entry in doc]
