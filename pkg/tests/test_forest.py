from __future__ import annotations

import numpy as np
import pytest

from depwatch.errors import SchemaMismatchError, TrainingError
from depwatch.evaluation import confusion_matrix, macro_f1, train_test_split
from depwatch.features import (
    LabeledDataset,
    MaintenanceLabel,
    compute_features,
    label_dataset,
)
from depwatch.forest import (
    ForestHyperparams,
    RandomForestModel,
    classify,
    feature_importance,
    train_classifier,
)
from depwatch.synth import generate_synthetic_ecosystem

from test_features import random_vector, vector


def synthetic_dataset(seed: int, n: int) -> LabeledDataset:
    eco = generate_synthetic_ecosystem(seed=seed, n_libraries=n)
    vectors = [
        compute_features(eco.series[lib], eco.as_of)
        for lib in sorted(eco.series, key=lambda l: l.sort_key)
    ]
    return label_dataset(vectors)


@pytest.fixture(scope="module")
def dataset400() -> LabeledDataset:
    return synthetic_dataset(seed=7, n=400)


class TestTraining:
    def test_single_label_dataset_rejected(self):
        rows = tuple((random_vector(np.random.default_rng(i)), MaintenanceLabel.ACTIVE) for i in range(6))
        with pytest.raises(TrainingError, match="FeatureComplete"):
            train_classifier(LabeledDataset(rows=rows))

    def test_single_label_per_class_trains_and_predicts_it(self):
        # one label dominating is fine as long as every class appears once
        rng = np.random.default_rng(0)
        rows = [(random_vector(rng), MaintenanceLabel.ACTIVE) for _ in range(20)]
        rows += [
            (vector(archived=True), MaintenanceLabel.INACTIVE),
            (vector(days_since_last_commit=100.0, commits_365d=2.0), MaintenanceLabel.DORMANT),
            (
                vector(days_since_last_commit=400.0, readme_stable_declared=True),
                MaintenanceLabel.FEATURE_COMPLETE,
            ),
        ]
        model = train_classifier(LabeledDataset(rows=tuple(rows)), ForestHyperparams(n_trees=15, seed=1))
        assert model.classify(rows[0][0]).probabilities[0] > 0

    def test_same_seed_gives_byte_identical_model(self, dataset400):
        hp = ForestHyperparams(n_trees=20, seed=7)
        a = train_classifier(dataset400, hp).to_json()
        b = train_classifier(dataset400, hp).to_json()
        assert a == b

    def test_different_seed_changes_the_forest(self, dataset400):
        a = train_classifier(dataset400, ForestHyperparams(n_trees=5, seed=1)).to_json()
        b = train_classifier(dataset400, ForestHyperparams(n_trees=5, seed=2)).to_json()
        assert a != b

    def test_holdout_macro_f1_on_separable_data(self, dataset400):
        x_rows = list(dataset400.rows)
        train_idx, test_idx = train_test_split(len(x_rows), test_fraction=0.3, seed=7)
        train = LabeledDataset(rows=tuple(x_rows[i] for i in train_idx))
        test = [x_rows[i] for i in test_idx]
        model = train_classifier(train, ForestHyperparams(n_trees=100, seed=7))
        predicted = [model.classify(fv).argmax() for fv, _ in test]
        score = macro_f1(confusion_matrix([label for _, label in test], predicted))
        assert score >= 0.9


class TestClassify:
    def test_vote_fractions(self):
        # a hand-built forest of 4 stumps voting 2/1/1/0
        def leaf(i):
            votes = [0, 0, 0, 0]
            votes[i] = 1
            return {"votes": votes}

        trees = [leaf(0), leaf(0), leaf(1), leaf(2)]
        model = RandomForestModel(
            trees=trees,
            hyperparams=ForestHyperparams(n_trees=4),
            schema=tuple(f"f{i}" for i in range(17)),
        )
        dist = model.classify_array(np.zeros(17))
        assert dist.probabilities == (0.5, 0.25, 0.25, 0.0)
        assert dist.argmax() is MaintenanceLabel.ACTIVE

    def test_forest_with_one_voice_gives_probability_one(self):
        # the degenerate case: every leaf votes the same class
        trees = [{"votes": [0, 0, 0, 5]} for _ in range(9)]
        model = RandomForestModel(
            trees=trees, hyperparams=ForestHyperparams(n_trees=9), schema=("a", "b")
        )
        rng = np.random.default_rng(1)
        for _ in range(10):
            dist = model.classify_array(rng.normal(size=2))
            assert dist.probability(MaintenanceLabel.INACTIVE) == 1.0

    def test_leaf_tie_breaks_in_label_order(self):
        tree = {"votes": [3, 3, 0, 0]}
        model = RandomForestModel(
            trees=[tree], hyperparams=ForestHyperparams(n_trees=1), schema=("a",)
        )
        assert model.classify_array(np.zeros(1)).argmax() is MaintenanceLabel.ACTIVE

    def test_schema_mismatch_rejected(self, dataset400):
        model = train_classifier(dataset400, ForestHyperparams(n_trees=3, seed=0))
        with pytest.raises(SchemaMismatchError):
            model.classify_array(np.zeros(3))

    def test_distribution_is_valid(self, dataset400):
        model = train_classifier(dataset400, ForestHyperparams(n_trees=7, seed=0))
        rng = np.random.default_rng(12)
        for _ in range(50):
            dist = model.classify(random_vector(rng))
            assert abs(sum(dist.probabilities) - 1.0) < 1e-9
            assert all(0.0 <= p <= 1.0 for p in dist.probabilities)

    def test_held_out_active_exemplar_classifies_active(self, dataset400):
        model = train_classifier(dataset400, ForestHyperparams(n_trees=50, seed=7))
        held_out = synthetic_dataset(seed=8, n=40)
        for fv, label in held_out.rows:
            if label is MaintenanceLabel.ACTIVE:
                assert classify(model, fv).argmax() is MaintenanceLabel.ACTIVE
                break


class TestSerialization:
    def test_save_load_round_trip(self, dataset400, tmp_path):
        model = train_classifier(dataset400, ForestHyperparams(n_trees=8, seed=3))
        path = tmp_path / "model.json"
        model.save(path)
        loaded = RandomForestModel.load(path)
        assert loaded.to_json() == model.to_json()
        rng = np.random.default_rng(4)
        for _ in range(20):
            fv = random_vector(rng)
            assert loaded.classify(fv) == model.classify(fv)


class TestFeatureImportance:
    def test_importances_sum_to_one(self, dataset400):
        model = train_classifier(dataset400, ForestHyperparams(n_trees=10, seed=5))
        ranked = feature_importance(model)
        assert abs(sum(v for _, v in ranked) - 1.0) < 1e-9
        assert ranked == sorted(ranked, key=lambda kv: (-kv[1], kv[0]))

    def test_constant_feature_has_zero_importance(self):
        # stars_total is identical in every row, so no tree can split on it
        rows = [
            (vector(commits_90d=5.0, days_since_last_commit=1.0), MaintenanceLabel.ACTIVE),
            (vector(days_since_last_commit=120.0, commits_365d=3.0), MaintenanceLabel.DORMANT),
            (vector(days_since_last_commit=400.0, readme_stable_declared=True),
             MaintenanceLabel.FEATURE_COMPLETE),
            (vector(days_since_last_commit=900.0), MaintenanceLabel.INACTIVE),
        ] * 10
        model = train_classifier(LabeledDataset(rows=tuple(rows)), ForestHyperparams(n_trees=10, seed=2))
        scores = dict(feature_importance(model))
        assert scores["stars_total"] == 0.0  # identical in every row above

    def test_label_determining_feature_ranks_first(self):
        rng = np.random.default_rng(42)
        rows = []
        for _ in range(200):
            gap = float(rng.integers(0, 800))
            fv = vector(
                days_since_last_commit=gap,
                commits_90d=1.0,  # keeps R1 alive for small gaps
                commits_365d=5.0,
                stars_total=float(rng.integers(0, 1000)),  # noise
                issues_opened_365d=float(rng.integers(0, 30)),
                readme_stable_declared=True,
            )
            rows.append((fv, MaintenanceLabel.ACTIVE if gap <= 90 else (
                MaintenanceLabel.DORMANT if gap <= 365 else MaintenanceLabel.FEATURE_COMPLETE
            )))
        rows.append((vector(archived=True), MaintenanceLabel.INACTIVE))
        model = train_classifier(LabeledDataset(rows=tuple(rows)), ForestHyperparams(n_trees=30, seed=9))
        ranked = feature_importance(model)
        assert ranked[0][0] == "days_since_last_commit"
