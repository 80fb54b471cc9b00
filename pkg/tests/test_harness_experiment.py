"""Experiment driver: seed derivation, splits, tables, and the end-to-end run."""

import json

import numpy as np
import pytest

from enggnn.checkpoint import load_checkpoint
from enggnn.graphs import FeatureGraph
from enggnn.harness.config import DataConfig, ExperimentConfig
from enggnn.harness.experiment import (
    _run_task,
    _set_task_context,
    aggregate_table,
    derive_seed,
    reaggregate,
    resolve_dataset,
    run_experiment,
    split_and_replicate,
    stratified_split,
    welch_table,
)
from enggnn.harness.io import read_csv_dicts, save_edge_list, save_matrix


class TestDeriveSeed:
    def test_frozen_values(self):
        """Hash-derived seeds are part of the reproducibility contract."""
        assert derive_seed(0, 0, "split") == 3485597460734430957
        assert derive_seed(0, 1, "split") == 4249758903201571274
        assert derive_seed(6, 0, "enggnn") == 7660455759504616094
        assert derive_seed(42, 3, "rf") == 5612373467232225313

    def test_distinct_across_axes(self):
        seeds = {
            derive_seed(m, r, t)
            for m in (0, 1)
            for r in (0, 1, 2)
            for t in ("split", "gbt", "rf")
        }
        assert len(seeds) == 18

    def test_fits_in_63_bits(self):
        for r in range(50):
            assert 0 <= derive_seed(123, r, "enggnn") < 2 ** 63


class TestStratifiedSplit:
    def test_largest_remainder_counts(self):
        """16 samples (10/6) at 0.8: floor gives [8, 4]; the leftover train slot
        goes to class 1 (remainder 0.8 beats 0.0)."""
        labels = np.array([0] * 10 + [1] * 6)
        train, test = stratified_split(labels, 0.8, np.random.default_rng(0))
        assert train.size == 13 and test.size == 3
        assert int((labels[train] == 0).sum()) == 8
        assert int((labels[train] == 1).sum()) == 5

    def test_partition_properties(self):
        rng = np.random.default_rng(2)
        labels = rng.integers(0, 2, size=83)
        train, test = stratified_split(labels, 0.7, np.random.default_rng(3))
        assert np.all(np.diff(train) > 0) and np.all(np.diff(test) > 0)
        combined = np.sort(np.concatenate([train, test]))
        np.testing.assert_array_equal(combined, np.arange(83))

    def test_every_class_survives_on_both_sides(self):
        """Extreme fractions are clamped so no side loses a class entirely."""
        labels = np.array([0, 0, 1, 1])
        train, test = stratified_split(labels, 0.9, np.random.default_rng(1))
        assert set(labels[train]) == {0, 1}
        assert set(labels[test]) == {0, 1}

    def test_single_member_class_rejected(self):
        with pytest.raises(ValueError, match="two samples"):
            stratified_split(np.array([0, 0, 1]), 0.8, np.random.default_rng(0))

    def test_fraction_bounds(self):
        labels = np.array([0, 0, 1, 1])
        for bad in (0.0, 1.0):
            with pytest.raises(ValueError, match="fraction"):
                stratified_split(labels, bad, np.random.default_rng(0))


class TestSplitAndReplicate:
    def test_replications_are_seeded_independently(self):
        labels = np.array([0] * 20 + [1] * 12)
        specs = split_and_replicate(labels, 0.75, 3, master_seed=7)
        assert [s.replication for s in specs] == [0, 1, 2]
        assert len({s.seed for s in specs}) == 3
        assert specs[0].seed == derive_seed(7, 0, "split")
        again = split_and_replicate(labels, 0.75, 3, master_seed=7)
        for a, b in zip(specs, again):
            np.testing.assert_array_equal(a.train_idx, b.train_idx)

    def test_zero_replications_rejected(self):
        with pytest.raises(ValueError, match="replications"):
            split_and_replicate(np.array([0, 0, 1, 1]), 0.8, 0, 0)


class TestTables:
    def test_aggregate_means_and_sds(self):
        rows = [
            {"model": "a", "x": 1.0},
            {"model": "a", "x": 2.0},
            {"model": "b", "x": 5.0},
            {"model": "b", "x": None},
        ]
        table = aggregate_table(rows, ("a", "b", "c"), ("x",))
        assert table[0] == ("a", "x", 1.5, pytest.approx(np.std([1, 2], ddof=1)), 2)
        assert table[1] == ("b", "x", 5.0, "", 1)
        assert table[2] == ("c", "x", "", "", 0)

    def test_welch_reproduces_hand_example(self):
        rows = [{"model": "enggnn", "m": v} for v in (1.0, 2.0, 3.0)]
        rows += [{"model": "rf", "m": v} for v in (2.0, 3.0, 4.0)]
        table = welch_table(rows, ("enggnn", "rf"), ("m",))
        assert len(table) == 1
        metric, baseline, t, df, p = table[0]
        assert (metric, baseline) == ("m", "rf")
        assert t == pytest.approx(-1.2247, abs=1e-4)
        assert df == pytest.approx(4.0)
        assert p == pytest.approx(0.288, abs=1e-3)

    def test_welch_skips_underpowered_sides(self):
        rows = [
            {"model": "enggnn", "m": 1.0},
            {"model": "enggnn", "m": 2.0},
            {"model": "rf", "m": 3.0},
        ]
        assert welch_table(rows, ("enggnn", "rf"), ("m",)) == []
        only_one_ref = [{"model": "enggnn", "m": 1.0}] + rows[2:]
        assert welch_table(only_one_ref, ("enggnn", "rf"), ("m",)) == []


class TestResolveDataset:
    def make_config(self, data, models=("gbt",)):
        return ExperimentConfig(seed=0, replications=1, models=models, data=data)

    def test_simulate_mode(self):
        config = self.make_config(DataConfig(
            source="simulate", n_samples=120, feature_fraction=0.05,
            true_fraction=0.34, attach_count=1,
        ))
        X, y, names, graph, labels, info = resolve_dataset(config, master_seed=9)
        assert X.shape == (120, 6)
        assert graph.node_count == 6
        assert labels is not None and 0 < labels.sum() < 6
        assert info["source"] == "simulate" and info["seed"] == 9
        X2, *_ = resolve_dataset(config, master_seed=9)
        np.testing.assert_array_equal(X, X2)
        X3, *_ = resolve_dataset(config, master_seed=10)
        assert not np.array_equal(X, X3)

    def test_files_mode(self, tmp_path):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(10, 3))
        y = np.array([0, 1] * 5)
        names = ["fa", "fb", "fc"]
        save_matrix(tmp_path / "m.csv", X, y, names)
        save_edge_list(tmp_path / "e.tsv", FeatureGraph(3, [(0, 1)]), names)
        config = self.make_config(DataConfig(
            source="files", matrix=str(tmp_path / "m.csv"), edges=str(tmp_path / "e.tsv"),
        ))
        X2, y2, names2, graph, labels, info = resolve_dataset(config, master_seed=0)
        np.testing.assert_array_equal(X2, X)
        np.testing.assert_array_equal(y2, y)
        assert names2 == names
        assert graph.edges == frozenset({(0, 1)})
        assert labels is None
        assert info["source"] == "files" and info["n_features"] == 3

    def test_files_mode_without_edges(self, tmp_path):
        save_matrix(tmp_path / "m.csv", np.eye(2), [0, 1], ["a", "b"])
        config = self.make_config(DataConfig(source="files", matrix=str(tmp_path / "m.csv")))
        *_, graph, labels, info = resolve_dataset(config, master_seed=0)
        assert graph is None and labels is None
        assert info["graph_edges"] is None


class TestRunTaskIsolation:
    def test_model_failure_is_captured_not_raised(self):
        rng = np.random.default_rng(0)
        _set_task_context({
            "X": rng.normal(size=(20, 4)),
            "y": np.array([0, 1] * 10),
            "graph": None,  # enggnn needs one: the task must fail, not crash
            "feature_labels": None,
            "nn_options": {},
            "gbt_options": {},
            "rf_options": {},
            "checkpoint_dir": None,
        })
        result = _run_task({
            "model": "enggnn", "replication": 0, "seed": 1,
            "train_idx": np.arange(16), "test_idx": np.arange(16, 20),
        })
        assert result["error"] is not None
        assert "ValueError" in result["error"]
        assert "metrics" not in result


@pytest.fixture(scope="module")
def experiment(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("exp")
    config = ExperimentConfig(
        seed=5,
        replications=2,
        models=("enggnn", "gbt"),
        # attach_count 1 keeps the one-hop important set a strict subset of the
        # features; denser graphs at this size swallow every feature and the
        # harness would (correctly) skip the feature-selection metrics.
        data=DataConfig(
            source="simulate", n_samples=160, feature_fraction=0.1,
            true_fraction=0.15, attach_count=1,
        ),
        output_dir=str(out_dir),
        save_checkpoints=True,
        nn_options={"epochs": 3},
    )
    summary = run_experiment(config)
    return config, summary, out_dir


class TestRunExperiment:
    def test_summary_counts(self, experiment):
        _, summary, out_dir = experiment
        assert summary["n_completed"] == 4
        assert summary["n_failed"] == 0
        assert summary["output_dir"] == str(out_dir)

    def test_run_table(self, experiment):
        _, summary, _ = experiment
        rows = read_csv_dicts(summary["paths"]["metrics_runs"])
        assert len(rows) == 4
        assert {(r["model"], r["replication"]) for r in rows} == {
            ("enggnn", "0"), ("enggnn", "1"), ("gbt", "0"), ("gbt", "1"),
        }
        for row in rows:
            for metric in ("accuracy", "precision", "recall", "f1", "roc_auc", "pr_auc"):
                assert 0.0 <= float(row[metric]) <= 1.0

    def test_aggregate_table_covers_feature_selection(self, experiment):
        _, summary, _ = experiment
        rows = read_csv_dicts(summary["paths"]["metrics_aggregate"])
        assert len(rows) == 2 * 8  # two models, six test metrics + two selection metrics
        by_key = {(r["model"], r["metric"]): r for r in rows}
        assert by_key[("enggnn", "fs_roc_auc")]["n_runs"] == "2"
        runs = read_csv_dicts(summary["paths"]["metrics_runs"])
        gbt_acc = [float(r["accuracy"]) for r in runs if r["model"] == "gbt"]
        assert float(by_key[("gbt", "accuracy")]["mean"]) == pytest.approx(np.mean(gbt_acc))

    def test_welch_table_written(self, experiment):
        _, summary, _ = experiment
        rows = read_csv_dicts(summary["paths"]["welch_tests"])
        assert len(rows) == 8  # one baseline, eight metrics
        assert {r["baseline"] for r in rows} == {"gbt"}

    def test_importance_files(self, experiment):
        _, _, out_dir = experiment
        for model in ("enggnn", "gbt"):
            for rep in (0, 1):
                rows = read_csv_dicts(out_dir / f"importance_{model}_{rep}.csv")
                assert len(rows) == 16
                pseudo = [float(r["pseudo_probability"]) for r in rows]
                assert max(pseudo) == 1.0

    def test_manifest(self, experiment):
        config, _, out_dir = experiment
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["master_seed"] == 5
        assert manifest["config"] == json.loads(json.dumps(config.echo(), default=list))
        assert manifest["n_completed"] == 4 and manifest["n_failed"] == 0
        assert len(manifest["splits"]) == 2
        for split in manifest["splits"]:
            assert split["n_train"] == 128 and split["n_test"] == 32
        for run in manifest["runs"]:
            assert run["status"] == "completed"
            assert run["wall_time_seconds"] > 0
            assert run["seed"] == derive_seed(5, run["replication"], run["model"])

    def test_checkpoints_saved_for_network_models_only(self, experiment):
        _, _, out_dir = experiment
        assert not list(out_dir.glob("checkpoint_gbt_*.npz"))
        paths = sorted(out_dir.glob("checkpoint_enggnn_*.npz"))
        assert len(paths) == 2
        model = load_checkpoint(paths[0])
        assert model.predict_proba(np.zeros((1, 16))).shape == (1, 2)

    def test_rerun_is_byte_identical(self, experiment, tmp_path):
        config, summary, _ = experiment
        rerun = run_experiment(config, output_dir=tmp_path / "again")
        for name in ("metrics_runs", "metrics_aggregate", "feature_selection", "welch_tests"):
            first = open(summary["paths"][name], "rb").read()
            second = open(rerun["paths"][name], "rb").read()
            assert first == second, name

    def test_reaggregate_rebuilds_identical_tables(self, experiment, tmp_path):
        _, summary, _ = experiment
        rebuilt = reaggregate(
            summary["paths"]["metrics_runs"],
            feature_selection_csv=summary["paths"]["feature_selection"],
            output_dir=tmp_path / "rebuilt",
        )
        for name in ("metrics_runs", "metrics_aggregate", "feature_selection", "welch_tests"):
            first = open(summary["paths"][name], "rb").read()
            second = open(rebuilt[name], "rb").read()
            assert first == second, name
