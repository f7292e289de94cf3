from __future__ import annotations

import json
from datetime import date

import pytest

from depwatch.errors import NotFoundError, ValidationError
from depwatch.features import MaintenanceLabel, compute_features, label_dataset
from depwatch.forest import ForestHyperparams, train_classifier
from depwatch.propagate import Verdict
from depwatch.scan import LibraryContext, ScanConfig, evaluate, load_config_file, run_scan, scan_single
from depwatch.synth import generate_synthetic_ecosystem

from conftest import AS_OF, FIXTURES

CHAIN5 = FIXTURES / "chain5.snapshot.json"
STORE = FIXTURES / "store"


def chain5_config(**overrides) -> ScanConfig:
    kwargs = dict(
        snapshot_path=CHAIN5,
        store_path=STORE,
        as_of=AS_OF,
        horizons=(1, 3),
    )
    kwargs.update(overrides)
    return ScanConfig(**kwargs)


class TestScanConfig:
    def test_requires_exactly_one_activity_source(self):
        with pytest.raises(ValidationError):
            ScanConfig(snapshot_path=CHAIN5, as_of=AS_OF)
        with pytest.raises(ValidationError):
            ScanConfig(
                snapshot_path=CHAIN5, as_of=AS_OF, store_path=STORE, api_url="http://x"
            )

    def test_rejects_unknown_horizons(self):
        with pytest.raises(ValidationError):
            chain5_config(horizons=(1, 2))

    def test_config_file_context_map(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps(
                {
                    "as_of": "2024-01-01",
                    "context": {"npm:chain-a@1.0.0": {"security_relevant": False}},
                    "defaults": {"security_relevant": True, "alternatives_exist": True},
                    "cost_per_review_hours": 2.0,
                }
            )
        )
        kwargs = load_config_file(path)
        assert kwargs["as_of"] == AS_OF
        assert kwargs["context"]["npm:chain-a@1.0.0"] == LibraryContext(
            security_relevant=False, alternatives_exist=False
        )
        assert kwargs["alternatives_exist_default"] is True
        assert kwargs["cost_per_review_hours"] == 2.0


class TestRunScan:
    def test_chain5_dormant_leaf_taints_everything(self):
        report = run_scan(chain5_config())
        assert len(report.entries) == 5
        assert report.suspicious_count == 5
        by_id = {str(e.id): e for e in report.entries}
        leaf = by_id["npm:chain-e@1.2.3"]
        assert leaf.label is MaintenanceLabel.DORMANT
        assert leaf.culprits == ()
        for name in ("chain-a", "chain-b", "chain-c", "chain-d"):
            entry = by_id[f"npm:{name}@" + {"chain-a": "1.0.0", "chain-b": "2.1.0",
                                            "chain-c": "0.9.4", "chain-d": "3.0.0"}[name]]
            assert entry.verdict is Verdict.SUSPICIOUS
            assert [str(c) for c, _ in entry.culprits] == ["npm:chain-e@1.2.3"]

    def test_all_active_subchain_is_clean(self, tmp_path):
        snapshot = {
            "format_version": 1,
            "ecosystem": "npm",
            "libraries": [
                {
                    "id": "npm:chain-a@1.0.0",
                    "repo": {"host": "git.example", "owner": "chain", "name": "chain-a"},
                    "deps": ["npm:chain-b@2.1.0"],
                },
                {
                    "id": "npm:chain-b@2.1.0",
                    "repo": {"host": "git.example", "owner": "chain", "name": "chain-b"},
                    "deps": [],
                },
            ],
            "roots": ["npm:chain-a@1.0.0"],
        }
        path = tmp_path / "clean.snapshot.json"
        path.write_text(json.dumps(snapshot))
        report = run_scan(chain5_config(snapshot_path=path))
        assert report.suspicious_count == 0
        assert all(e.action is None for e in report.entries)
        assert all(e.risk_score == 0.0 for e in report.entries)

    def test_missing_repo_ref_labels_inactive_with_warning(self, tmp_path):
        snapshot = {
            "format_version": 1,
            "ecosystem": "npm",
            "libraries": [{"id": "npm:mystery", "deps": []}],
            "roots": ["npm:mystery"],
        }
        path = tmp_path / "norepo.snapshot.json"
        path.write_text(json.dumps(snapshot))
        report = run_scan(chain5_config(snapshot_path=path))
        entry = report.entries[0]
        assert entry.label is MaintenanceLabel.INACTIVE
        assert entry.verdict is Verdict.SUSPICIOUS
        assert any("no repository reference" in w for w in report.warnings)

    def test_store_miss_labels_inactive_with_warning(self, tmp_path):
        snapshot = {
            "format_version": 1,
            "ecosystem": "npm",
            "libraries": [
                {
                    "id": "npm:ghost",
                    "repo": {"host": "git.example", "owner": "chain", "name": "ghost"},
                    "deps": [],
                }
            ],
            "roots": ["npm:ghost"],
        }
        path = tmp_path / "ghost.snapshot.json"
        path.write_text(json.dumps(snapshot))
        report = run_scan(chain5_config(snapshot_path=path))
        assert report.entries[0].label is MaintenanceLabel.INACTIVE
        assert any("fetch failed" in w for w in report.warnings)

    def test_actions_follow_context_map(self):
        config = chain5_config(
            context={
                "npm:chain-a@1.0.0": LibraryContext(security_relevant=False, alternatives_exist=False),
                "npm:chain-b@2.1.0": LibraryContext(security_relevant=True, alternatives_exist=True),
            }
        )
        report = run_scan(config)
        actions = {str(e.id): e.action for e in report.entries}
        from depwatch.report import Action

        assert actions["npm:chain-a@1.0.0"] is Action.IGNORE_WARNINGS
        assert actions["npm:chain-b@2.1.0"] is Action.REPLACEMENT
        assert actions["npm:chain-c@0.9.4"] is Action.CONTINUE_DEVELOPMENT  # defaults

    def test_short_history_keeps_current_label_with_warning(self, tmp_path):
        from depwatch.providers import OfflineStore
        from conftest import make_series

        store_dir = tmp_path / "store"
        OfflineStore(store_dir).save(make_series([3, 3, 3, 3], name="young"))  # too short to fit
        snapshot = {
            "format_version": 1,
            "ecosystem": "npm",
            "libraries": [
                {
                    "id": "npm:young",
                    "repo": {"host": "test.example", "owner": "own", "name": "young"},
                    "deps": [],
                }
            ],
            "roots": ["npm:young"],
        }
        path = tmp_path / "young.snapshot.json"
        path.write_text(json.dumps(snapshot))
        report = run_scan(chain5_config(snapshot_path=path, store_path=store_dir))
        entry = report.entries[0]
        assert entry.label is MaintenanceLabel.ACTIVE
        assert all(label is entry.label for label, _ in entry.horizons.values())
        assert any("forecast unavailable" in w for w in entry.warnings)

    def test_report_carries_fixed_graph_note(self):
        report = run_scan(chain5_config(horizons=(1,)))
        assert any("held fixed" in note for note in report.notes)

    def test_cost_multiplier_reports_hours_saved(self, tmp_path):
        report = run_scan(chain5_config(cost_per_review_hours=2.5))
        # every chain5 library is suspicious: nothing saved
        assert report.review_hours_saved == 0.0


class TestScanSingle:
    def test_single_active_leaf_is_unsuspicious(self):
        report = scan_single(["npm:chain-d@3.0.0"], chain5_config(horizons=(1,)))
        # chain-d depends on the dormant chain-e, so scope is two libraries
        assert len(report.entries) == 2

    def test_leaf_without_deps_scans_alone(self):
        report = scan_single(["npm:chain-e@1.2.3"], chain5_config(horizons=(1,)))
        assert len(report.entries) == 1
        assert report.entries[0].verdict is Verdict.SUSPICIOUS  # dormant itself

    def test_active_leaf_alone_is_clean(self, tmp_path):
        snapshot = {
            "format_version": 1,
            "ecosystem": "npm",
            "libraries": [
                {
                    "id": "npm:chain-b@2.1.0",
                    "repo": {"host": "git.example", "owner": "chain", "name": "chain-b"},
                    "deps": [],
                }
            ],
            "roots": ["npm:chain-b@2.1.0"],
        }
        path = tmp_path / "leaf.snapshot.json"
        path.write_text(json.dumps(snapshot))
        report = scan_single(["npm:chain-b@2.1.0"], chain5_config(snapshot_path=path, horizons=(1,)))
        assert len(report.entries) == 1
        assert report.entries[0].verdict is Verdict.UNSUSPICIOUS
        assert report.suspicious_count == 0

    def test_unknown_id_is_named_in_error(self):
        with pytest.raises(NotFoundError, match="npm:nope"):
            scan_single(["npm:nope"], chain5_config())

    def test_suspicious_via_transitive_dep_has_one_culprit(self):
        report = scan_single(["npm:chain-d@3.0.0"], chain5_config(horizons=(1,)))
        entry = next(e for e in report.entries if str(e.id) == "npm:chain-d@3.0.0")
        assert entry.verdict is Verdict.SUSPICIOUS
        assert len(entry.culprits) == 1


class TestEvaluate:
    def test_rules_only_closed_loop_is_perfect(self, fixtures_dir):
        result = evaluate(fixtures_dir / "eco20")
        assert result.accuracy == 1.0
        assert result.macro_f1 == 1.0
        assert result.effort.recall == 1.0
        assert result.effort.precision == 1.0

    def test_binary_mode_counts(self, fixtures_dir):
        result = evaluate(fixtures_dir / "eco20", binary=True)
        assert result.binary is not None
        assert sum(result.binary.values()) == 20
        assert result.binary["fp"] == 0 and result.binary["fn"] == 0

    def test_imperfect_model_metrics_match_independent_tally(self, fixtures_dir, tmp_path):
        # a deliberately weak forest so some predictions are wrong
        eco = generate_synthetic_ecosystem(seed=8, n_libraries=60)
        vectors = [compute_features(eco.series[l], eco.as_of) for l in sorted(eco.series, key=lambda l: l.sort_key)]
        weak = train_classifier(
            label_dataset(vectors), ForestHyperparams(n_trees=1, max_depth=2, seed=0)
        )
        model_path = tmp_path / "weak.json"
        weak.save(model_path)

        result = evaluate(fixtures_dir / "eco20", model_path=model_path)

        # independent tally: raw loops over truth vs a fresh scan's labels
        truth_doc = json.loads((fixtures_dir / "eco20" / "truth.json").read_text())
        config = ScanConfig(
            snapshot_path=fixtures_dir / "eco20" / "snapshot.json",
            store_path=fixtures_dir / "eco20" / "store",
            as_of=date.fromisoformat(truth_doc["as_of"]),
            model_path=model_path,
        )
        report = run_scan(config)
        predicted = {str(e.id): e.label.value for e in report.entries}
        order = ["Active", "FeatureComplete", "Dormant", "Inactive"]
        tally = [[0] * 4 for _ in range(4)]
        for lib, true_label in truth_doc["labels"].items():
            tally[order.index(true_label)][order.index(predicted[lib])] += 1
        assert result.confusion == tally
        correct = sum(tally[i][i] for i in range(4))
        assert result.accuracy == pytest.approx(correct / 20)
