"""From weekly activity history to a maintenance label.

Loads one repository from the offline store, computes the feature vector at a
reference date, and walks the labeling rules on a few contrived histories to
show why last-commit age alone is not enough.
"""

import json
from datetime import date
from pathlib import Path

from depwatch.activity import series_from_dict
from depwatch.features import (
    NO_RESPONSE_DATA,
    FeatureVector,
    compute_features,
    labeling_rule,
)

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

doc = json.loads(
    (FIXTURES / "store" / "git.example" / "acme" / "repoA.activity.json").read_text()
)
series = series_from_dict(doc)
as_of = date(2023, 6, 5)

fv = compute_features(series, as_of)
print(f"{series.repo} as of {as_of}:")
for name, value in sorted(fv.to_dict().items()):
    print(f"  {name:32} {value}")
rule, label = labeling_rule(fv)
print(f"\nrule {rule} fires -> {label.value}")


def probe(description: str, **overrides):
    base = dict(
        commits_30d=0.0, commits_90d=0.0, commits_365d=0.0,
        contributors_365d=0.0, core_contributors_365d=0.0,
        days_since_last_commit=500.0, days_since_last_release=500.0,
        releases_365d=0.0, issues_opened_365d=0.0, issues_closed_365d=0.0,
        issue_close_ratio_365d=1.0, median_issue_response_hours=NO_RESPONSE_DATA,
        stars_total=50.0, project_age_days=900.0,
        archived=False, readme_deprecated=False, readme_stable_declared=False,
    )
    base.update(overrides)
    rule, label = labeling_rule(FeatureVector(**base))
    print(f"  {rule}  {label.value:16} {description}")


print("\nwhy a naive last-commit threshold misleads:")
probe("archived repo with recent commits", archived=True, commits_90d=9.0, days_since_last_commit=2.0)
probe("committed yesterday", commits_90d=4.0, days_since_last_commit=1.0, commits_365d=40.0)
probe("quiet for 6 months after years of work", days_since_last_commit=180.0, commits_365d=12.0)
probe("finished code, maintainers still answer issues",
      days_since_last_commit=700.0, median_issue_response_hours=48.0)
probe("finished code, README says stable", days_since_last_commit=700.0, readme_stable_declared=True)
probe("dead and unresponsive", days_since_last_commit=700.0, median_issue_response_hours=1200.0)
