"""Forecast weekly activity and classify the predicted future.

Fits the four classical methods to a decaying commit series, compares them in
a rolling-origin backtest, then runs the full predict-then-classify pipeline
to see when a currently Active library is expected to go Dormant.
"""

from datetime import date
from pathlib import Path

from depwatch.features import RuleBasedClassifier
from depwatch.forecast import (
    HORIZON_MONTHS,
    Horizon,
    backtest,
    fit,
    forecast_labels,
    load_value_series,
    predict,
)

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

decay = load_value_series(FIXTURES / "decay.series.json")
print(f"decaying commit series ({len(decay)} weeks): {decay[:6]} ... {decay[-4:]}")

for method in ("naive_last", "linear_trend", "ses", "holt"):
    model = fit(decay, method)
    entry = predict(model, Horizon(3))
    print(
        f"  {method:13} 3-month point {entry.point:7.2f}   "
        f"90% interval [{entry.lower:.2f}, {entry.upper:.2f}]"
    )

noisy = load_value_series(FIXTURES / "noisy_trend.series.json")
print(f"\nrolling-origin backtest on a noisy downward trend ({len(noisy)} weeks), 13 steps ahead:")
for method in ("naive_last", "linear_trend", "ses", "holt"):
    metrics = backtest(noisy, method, steps=13)
    print(
        f"  {method:13} MAE {metrics.mae:6.2f}   MAPE {metrics.mape:6.1%}   "
        f"interval hit rate {metrics.interval_hit_rate:.0%} over {metrics.n_origins} origins"
    )

# predict features, then classify the synthesized future vectors
from depwatch.activity import ActivityTimeSeries, RepoRef, WEEK, WeekBucket  # noqa: E402

first_week = date(2023, 1, 2)
weeks = tuple(
    WeekBucket(
        week_start=first_week + i * WEEK,
        commits=int(v),
        active_contributors=1 if v else 0,
        stars_total=300,
    )
    for i, v in enumerate(decay)
)
activity = ActivityTimeSeries(
    repo=RepoRef(host="git.example", owner="demo", name="winding-down"),
    created_at=first_week,
    weeks=weeks,
)
as_of = date(2023, 6, 15)

print(f"\npredicted maintenance state of a winding-down library (as of {as_of}):")
outlook = forecast_labels(activity, RuleBasedClassifier(), HORIZON_MONTHS, as_of)
for months in HORIZON_MONTHS:
    label, dist = outlook[months]
    print(f"  +{months:>2} months: {label.value:10} p={dist.probability(label):.2f}")
