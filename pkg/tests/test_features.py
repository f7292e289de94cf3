from __future__ import annotations

import json
from datetime import date

import numpy as np
import pytest

from depwatch.activity import series_from_dict
from depwatch.errors import ValidationError
from depwatch.features import (
    FEATURE_NAMES,
    NO_RESPONSE_DATA,
    FeatureVector,
    LabelDistribution,
    MaintenanceLabel,
    RuleBasedClassifier,
    apply_labeling_strategy,
    compute_features,
    label_dataset,
    labeling_rule,
)

from conftest import AS_OF, make_series


def vector(**overrides) -> FeatureVector:
    base = dict(
        commits_30d=0.0,
        commits_90d=0.0,
        commits_365d=0.0,
        contributors_365d=0.0,
        core_contributors_365d=0.0,
        days_since_last_commit=400.0,
        days_since_last_release=400.0,
        releases_365d=0.0,
        issues_opened_365d=0.0,
        issues_closed_365d=0.0,
        issue_close_ratio_365d=1.0,
        median_issue_response_hours=NO_RESPONSE_DATA,
        stars_total=10.0,
        project_age_days=1000.0,
        archived=False,
        readme_deprecated=False,
        readme_stable_declared=False,
    )
    base.update(overrides)
    return FeatureVector(**base)


class TestComputeFeaturesOnRepoA:
    """Frozen values hand-counted from the patterned repoA fixture."""

    AS_OF_A = date(2023, 6, 5)

    @pytest.fixture
    def repo_a(self, fixtures_dir):
        path = fixtures_dir / "store" / "git.example" / "acme" / "repoA.activity.json"
        return series_from_dict(json.loads(path.read_text()))

    def test_commits_90d_matches_raw_json_tally(self, repo_a, fixtures_dir):
        path = fixtures_dir / "store" / "git.example" / "acme" / "repoA.activity.json"
        doc = json.loads(path.read_text())
        tally = sum(
            w["commits"]
            for w in doc["weeks"]
            if date(2023, 3, 7) <= date.fromisoformat(w["week_start"]) <= self.AS_OF_A
        )
        fv = compute_features(repo_a, self.AS_OF_A)
        assert fv.commits_90d == tally == 12

    def test_window_and_derived_values(self, repo_a):
        fv = compute_features(repo_a, self.AS_OF_A)
        assert fv.commits_30d == 4
        assert fv.commits_365d == 52
        assert fv.contributors_365d == 2
        assert fv.core_contributors_365d == 2  # ann alone covers 35/52 < 80%
        assert fv.days_since_last_commit == 7
        assert fv.releases_365d == 1
        assert fv.days_since_last_release == 141
        assert fv.issues_opened_365d == 27
        assert fv.issue_close_ratio_365d == 1.0
        assert fv.median_issue_response_hours == 25.0
        assert fv.stars_total == 420
        assert fv.project_age_days == 518
        assert apply_labeling_strategy(fv) is MaintenanceLabel.ACTIVE

    def test_as_of_before_creation_rejected(self, repo_a):
        with pytest.raises(ValidationError):
            compute_features(repo_a, date(2021, 12, 1))


class TestComputeFeatures:
    def test_days_since_last_commit_zero_at_last_commit_week(self):
        series = make_series([1, 0, 2, 0, 0, 1, 0, 1])
        fv = compute_features(series, AS_OF)
        assert fv.days_since_last_commit == 0

    def test_single_contributor_is_the_core(self):
        series = make_series(
            [1] * 8, authors_per_week=[{"solo": 1}] * 8
        )
        fv = compute_features(series, AS_OF)
        assert fv.contributors_365d == 1
        assert fv.core_contributors_365d == 1

    def test_core_tie_breaks_toward_alphabetical(self):
        # ann and bob at 2 commits each; either alone covers 50% < 80%,
        # so both are needed; with share 0.5 only the alphabetical first would be
        from depwatch.features import LabelingThresholds

        series = make_series(
            [2, 2, 0, 0, 0, 0, 0, 2, 2] + [0] * 0,
            authors_per_week=[{"ann": 2}, {"bob": 2}, {}, {}, {}, {}, {}, {"bob": 2}, {"ann": 2}][
                : 9
            ],
        )
        fv = compute_features(series, AS_OF, LabelingThresholds(core_share=0.5))
        assert fv.core_contributors_365d == 1

    def test_windows_nest(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            series = make_series(list(rng.integers(0, 5, size=60)))
            fv = compute_features(series, AS_OF)
            assert fv.commits_30d <= fv.commits_90d <= fv.commits_365d

    def test_adding_recent_commit_bumps_commits_30d_by_one(self):
        counts = [2, 0, 1, 3, 0, 0, 1, 2, 0, 1]
        before = compute_features(make_series(counts), AS_OF)
        bumped = list(counts)
        bumped[-1] += 1  # the as_of week sits inside the trailing 30 days
        after = compute_features(make_series(bumped), AS_OF)
        assert after.commits_30d == before.commits_30d + 1
        assert after.project_age_days == before.project_age_days

    def test_no_issue_samples_gives_sentinel(self):
        fv = compute_features(make_series([1] * 8), AS_OF)
        assert fv.median_issue_response_hours == NO_RESPONSE_DATA


class TestLabelingRules:
    def test_archived_is_inactive(self):
        assert apply_labeling_strategy(vector(archived=True)) is MaintenanceLabel.INACTIVE
        rule, _ = labeling_rule(vector(archived=True, commits_90d=50, days_since_last_commit=0))
        assert rule == "R0"

    def test_readme_deprecated_is_inactive(self):
        assert apply_labeling_strategy(vector(readme_deprecated=True)) is MaintenanceLabel.INACTIVE

    def test_stable_readme_after_long_gap_is_feature_complete(self):
        fv = vector(
            days_since_last_commit=540.0,
            median_issue_response_hours=120.0,
            readme_stable_declared=True,
        )
        rule, label = labeling_rule(fv)
        assert (rule, label) == ("R3", MaintenanceLabel.FEATURE_COMPLETE)

    def test_recent_commits_are_active(self):
        fv = vector(commits_90d=25.0, days_since_last_commit=3.0, commits_365d=25.0)
        rule, label = labeling_rule(fv)
        assert (rule, label) == ("R1", MaintenanceLabel.ACTIVE)

    def test_mid_gap_with_prior_activity_is_dormant(self):
        fv = vector(days_since_last_commit=180.0, commits_365d=5.0)
        assert apply_labeling_strategy(fv) is MaintenanceLabel.DORMANT

    def test_long_gap_unresponsive_is_inactive(self):
        fv = vector(days_since_last_commit=700.0, median_issue_response_hours=900.0)
        assert apply_labeling_strategy(fv) is MaintenanceLabel.INACTIVE

    def test_every_random_vector_matches_exactly_one_rule(self):
        rng = np.random.default_rng(9)
        seen = set()
        for _ in range(20_000):
            fv = random_vector(rng)
            rule, label = labeling_rule(fv)
            assert rule in {"R0", "R1", "R2", "R3", "R4"}
            assert labeling_rule(fv) == (rule, label)  # deterministic
            if fv.archived:
                assert label is MaintenanceLabel.INACTIVE
            seen.add(rule)
        assert seen == {"R0", "R1", "R2", "R3", "R4"}


def random_vector(rng: np.random.Generator) -> FeatureVector:
    age = float(rng.integers(0, 4000))
    opened = float(rng.integers(0, 50))
    closed = float(rng.integers(0, 50))
    return FeatureVector(
        commits_30d=float(rng.integers(0, 30)),
        commits_90d=float(rng.integers(0, 90)),
        commits_365d=float(rng.integers(0, 400)),
        contributors_365d=float(rng.integers(0, 40)),
        core_contributors_365d=float(rng.integers(0, 10)),
        days_since_last_commit=float(rng.integers(0, 4000)),
        days_since_last_release=float(rng.integers(0, 4000)),
        releases_365d=float(rng.integers(0, 20)),
        issues_opened_365d=opened,
        issues_closed_365d=closed,
        issue_close_ratio_365d=1.0 if opened == 0 else min(1.0, closed / opened),
        median_issue_response_hours=float(rng.choice([-1.0, 5.0, 100.0, 336.0, 500.0, 2000.0])),
        stars_total=float(rng.integers(0, 100_000)),
        project_age_days=age,
        archived=bool(rng.random() < 0.1),
        readme_deprecated=bool(rng.random() < 0.1),
        readme_stable_declared=bool(rng.random() < 0.2),
    )


class TestLabelDataset:
    def test_single_active_vector(self):
        ds = label_dataset([vector(commits_90d=5.0, days_since_last_commit=2.0)])
        assert ds.histogram()[MaintenanceLabel.ACTIVE] == 1
        assert len(ds.rows) == 1

    def test_empty_list_rejected(self):
        with pytest.raises(ValidationError):
            label_dataset([])

    def test_forty_vectors_ten_per_state(self):
        vectors = []
        for i in range(10):
            vectors.append(vector(commits_90d=1.0 + i, days_since_last_commit=float(i * 9)))
            vectors.append(vector(days_since_last_commit=100.0 + 20 * i, commits_365d=1.0 + i))
            vectors.append(
                vector(days_since_last_commit=400.0 + 30 * i, readme_stable_declared=True)
            )
            vectors.append(
                vector(archived=True) if i % 2 else vector(days_since_last_commit=400.0 + i)
            )
        ds = label_dataset(vectors)
        assert ds.histogram() == {
            MaintenanceLabel.ACTIVE: 10,
            MaintenanceLabel.FEATURE_COMPLETE: 10,
            MaintenanceLabel.DORMANT: 10,
            MaintenanceLabel.INACTIVE: 10,
        }


class TestLabelDistribution:
    def test_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            LabelDistribution((0.5, 0.1, 0.1, 0.1))

    def test_argmax_tie_breaks_in_label_order(self):
        dist = LabelDistribution((0.25, 0.25, 0.25, 0.25))
        assert dist.argmax() is MaintenanceLabel.ACTIVE
        dist = LabelDistribution((0.1, 0.4, 0.4, 0.1))
        assert dist.argmax() is MaintenanceLabel.FEATURE_COMPLETE

    def test_rules_classifier_yields_point_mass(self):
        dist = RuleBasedClassifier().classify(vector(archived=True))
        assert dist.probability(MaintenanceLabel.INACTIVE) == 1.0
        assert dist.argmax() is MaintenanceLabel.INACTIVE


class TestFeatureVectorValidation:
    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            vector(commits_30d=float("nan"))

    def test_rejects_negative_counts(self):
        with pytest.raises(ValidationError):
            vector(commits_30d=-1.0)

    def test_rejects_bad_ratio(self):
        with pytest.raises(ValidationError):
            vector(issue_close_ratio_365d=1.5)

    def test_sentinel_median_allowed(self):
        assert vector(median_issue_response_hours=-1.0).median_issue_response_hours == -1.0
        with pytest.raises(ValidationError):
            vector(median_issue_response_hours=-2.0)

    def test_array_layout_matches_schema(self):
        fv = vector(commits_30d=3.0, archived=True)
        arr = fv.to_array()
        assert arr.shape == (len(FEATURE_NAMES),)
        assert arr[FEATURE_NAMES.index("commits_30d")] == 3.0
        assert arr[FEATURE_NAMES.index("archived")] == 1.0
