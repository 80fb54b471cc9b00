"""Experiment driver: seeded stratified replications over a model roster.

Every (replication, model) run gets its own seed derived by hashing
``master_seed:replication:tag``, so results are independent of execution
order and worker count; rerunning an experiment with the same inputs yields
byte-identical metric tables (wall-clock times and timestamps live only in
the manifest).
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from .. import __version__ as package_version
from ..checkpoint import save_checkpoint
from ..metrics import (
    classification_metrics,
    percentile_rank,
    pr_auc,
    roc_auc,
    welch_t_test,
)
from ..models import make_model
from ..nn.scaling import ZScoreScaler
from ..simulate import SimulationScenario, build_dataset
from .config import ExperimentConfig
from .io import load_edge_list, load_matrix, write_csv

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ("accuracy", "precision", "recall", "f1", "roc_auc", "pr_auc")
FS_COLUMNS = ("fs_roc_auc", "fs_pr_auc")
NN_KINDS = ("enggnn", "gedfn_e", "gedfn_xgb", "gedfn_rf", "dfn")


def derive_seed(master_seed: int, replication: int, tag: str) -> int:
    """Stable 63-bit seed for one (replication, purpose) pair."""
    digest = hashlib.sha256(f"{master_seed}:{replication}:{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def stratified_split(labels, fraction: float, rng):
    """Class-stratified index split via largest-remainder apportionment.

    Training counts per class are floor(fraction * n_c) plus one extra for the
    largest fractional remainders until round(fraction * n) is reached, then
    clamped so every class keeps at least one sample on each side (which
    requires two members per class). Returns sorted (train_idx, test_idx).
    """
    labels = np.asarray(labels)
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    classes, counts = np.unique(labels, return_counts=True)
    if np.any(counts < 2):
        raise ValueError("every class needs at least two samples to split")
    exact = fraction * counts
    base = np.floor(exact).astype(np.int64)
    extra = int(round(fraction * labels.size)) - int(base.sum())
    take = base.copy()
    if extra > 0:
        by_remainder = np.argsort(-(exact - base), kind="stable")
        take[by_remainder[:extra]] += 1
    take = np.clip(take, 1, counts - 1)
    train_parts = []
    test_parts = []
    for cls, k in zip(classes, take):
        members = rng.permutation(np.nonzero(labels == cls)[0])
        train_parts.append(members[:k])
        test_parts.append(members[k:])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts))


@dataclass(frozen=True)
class SplitSpec:
    replication: int
    seed: int
    train_idx: np.ndarray
    test_idx: np.ndarray


def split_and_replicate(labels, fraction: float, replications: int, master_seed: int):
    """Independent stratified splits, one per replication, each self-seeded."""
    if replications < 1:
        raise ValueError(f"replications must be positive, got {replications}")
    specs = []
    for replication in range(replications):
        seed = derive_seed(master_seed, replication, "split")
        rng = np.random.default_rng(seed)
        train_idx, test_idx = stratified_split(labels, fraction, rng)
        specs.append(SplitSpec(replication, seed, train_idx, test_idx))
    return specs


# Shared payload for worker processes (set in the parent; re-set by the pool
# initializer under spawn-style multiprocessing).
_TASK_CONTEXT = None


def _set_task_context(context) -> None:
    global _TASK_CONTEXT
    _TASK_CONTEXT = context


def _run_task(task: dict) -> dict:
    ctx = _TASK_CONTEXT
    kind = task["model"]
    result = {
        "replication": task["replication"],
        "model": kind,
        "seed": task["seed"],
        "error": None,
    }
    try:
        X = ctx["X"]
        y = ctx["y"]
        train_idx = task["train_idx"]
        test_idx = task["test_idx"]
        scaler = ZScoreScaler().fit(X[train_idx])
        x_train = scaler.transform(X[train_idx])
        x_test = scaler.transform(X[test_idx])
        model = make_model(
            kind,
            external_graph=ctx["graph"],
            random_state=task["seed"],
            nn_options=ctx["nn_options"],
            gbt_options=ctx["gbt_options"],
            rf_options=ctx["rf_options"],
        )
        started = time.perf_counter()
        model.fit(x_train, y[train_idx])
        result["wall_time_seconds"] = time.perf_counter() - started
        scores = model.predict_proba(x_test)[:, 1]
        predictions = model.predict(x_test)
        metrics = classification_metrics(y[test_idx], predictions)
        metrics["roc_auc"] = roc_auc(y[test_idx], scores)
        metrics["pr_auc"] = pr_auc(y[test_idx], scores)
        result["metrics"] = metrics
        importance = np.asarray(model.feature_importances_, dtype=np.float64)
        pseudo = percentile_rank(importance)
        result["importance"] = importance
        result["pseudo"] = pseudo
        feature_labels = ctx["feature_labels"]
        if feature_labels is not None and 0 < int(feature_labels.sum()) < feature_labels.size:
            result["feature_selection"] = {
                "fs_roc_auc": roc_auc(feature_labels, pseudo),
                "fs_pr_auc": pr_auc(feature_labels, pseudo),
            }
        if ctx["checkpoint_dir"] is not None and kind in NN_KINDS:
            path = Path(ctx["checkpoint_dir"]) / f"checkpoint_{kind}_{task['replication']}.npz"
            save_checkpoint(model, path)
    except Exception as exc:  # noqa: BLE001 - a failed run must not sink the batch
        result["error"] = f"{type(exc).__name__}: {exc}"
    return result


def resolve_dataset(config: ExperimentConfig, master_seed: int):
    """Materialize the experiment data: simulated or loaded from files.

    Returns ``(X, y, feature_names, graph, feature_labels, dataset_info)``.
    """
    data = config.data
    if data.source == "simulate":
        scenario = SimulationScenario(
            n_samples=data.n_samples,
            feature_fraction=data.feature_fraction,
            true_fraction=data.true_fraction,
            attach_count=data.attach_count,
            threshold=data.threshold,
            threshold_mode=data.threshold_mode,
            seed=master_seed,
        )
        dataset = build_dataset(scenario)
        info = {"source": "simulate", "seed": master_seed, **dataset.details}
        return (
            dataset.X, dataset.y, dataset.feature_names,
            dataset.graph, dataset.feature_labels, info,
        )
    X, y, feature_names = load_matrix(data.matrix, data.label_column)
    graph = None
    if data.edges is not None:
        graph = load_edge_list(data.edges, feature_names)
    info = {
        "source": "files",
        "matrix": data.matrix,
        "edges": data.edges,
        "n_samples": int(X.shape[0]),
        "n_features": int(X.shape[1]),
        "graph_edges": None if graph is None else graph.edge_count,
        "class_prevalence": float(np.mean(y)),
    }
    return X, y, feature_names, graph, None, info


def aggregate_table(run_rows, models, metric_names):
    """(model, metric, mean, sd, n_runs) rows; sd is empty below two runs."""
    rows = []
    for model in models:
        for metric in metric_names:
            values = [
                row[metric]
                for row in run_rows
                if row["model"] == model and row.get(metric) is not None
            ]
            if values:
                mean = float(np.mean(values))
                sd = float(np.std(values, ddof=1)) if len(values) > 1 else ""
            else:
                mean = ""
                sd = ""
            rows.append((model, metric, mean, sd, len(values)))
    return rows


def welch_table(run_rows, models, metric_names, reference: str = "enggnn"):
    """Welch tests of the reference model against every other model, per metric.

    Rows appear only when both sides have at least two completed runs.
    """
    rows = []
    for metric in metric_names:
        per_model = {
            model: [
                row[metric]
                for row in run_rows
                if row["model"] == model and row.get(metric) is not None
            ]
            for model in models
        }
        reference_values = per_model.get(reference, [])
        if len(reference_values) < 2:
            continue
        for model in models:
            if model == reference or len(per_model[model]) < 2:
                continue
            outcome = welch_t_test(reference_values, per_model[model])
            rows.append((metric, model, outcome.statistic, outcome.df, outcome.p_value))
    return rows


def _merged_run_rows(results):
    """Flatten task results into per-run metric dicts (completed runs only)."""
    rows = []
    for result in results:
        if result["error"] is not None:
            continue
        row = {"replication": result["replication"], "model": result["model"]}
        row.update(result["metrics"])
        row.update(result.get("feature_selection") or {})
        rows.append(row)
    return rows


def _json_ready(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def write_result_tables(out_dir: Path, run_rows, models, with_feature_selection: bool):
    """Write the runs/aggregate/Welch tables; returns their paths."""
    paths = {}
    runs_path = out_dir / "metrics_runs.csv"
    write_csv(
        runs_path,
        ("replication", "model") + METRIC_COLUMNS,
        (
            [row["replication"], row["model"]] + [row[m] for m in METRIC_COLUMNS]
            for row in run_rows
        ),
    )
    paths["metrics_runs"] = runs_path
    metric_names = METRIC_COLUMNS + (FS_COLUMNS if with_feature_selection else ())
    if with_feature_selection:
        fs_path = out_dir / "feature_selection.csv"
        write_csv(
            fs_path,
            ("replication", "model") + FS_COLUMNS,
            (
                [row["replication"], row["model"]] + [row[m] for m in FS_COLUMNS]
                for row in run_rows
                if row.get("fs_roc_auc") is not None
            ),
        )
        paths["feature_selection"] = fs_path
    aggregate_path = out_dir / "metrics_aggregate.csv"
    write_csv(
        aggregate_path,
        ("model", "metric", "mean", "sd", "n_runs"),
        aggregate_table(run_rows, models, metric_names),
    )
    paths["metrics_aggregate"] = aggregate_path
    if "enggnn" in models:
        welch_rows = welch_table(run_rows, models, metric_names)
        if welch_rows:
            welch_path = out_dir / "welch_tests.csv"
            write_csv(
                welch_path,
                ("metric", "baseline", "t_statistic", "df", "p_value"),
                welch_rows,
            )
            paths["welch_tests"] = welch_path
    return paths


def run_experiment(config: ExperimentConfig, output_dir=None, seed=None, workers=None) -> dict:
    """Run the full benchmark described by ``config``; returns a summary dict."""
    master_seed = config.seed if seed is None else int(seed)
    n_workers = config.workers if workers is None else int(workers)
    if n_workers < 1:
        raise ValueError(f"workers must be positive, got {n_workers}")
    out_dir = Path(output_dir if output_dir is not None else config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    X, y, feature_names, graph, feature_labels, dataset_info = resolve_dataset(
        config, master_seed
    )
    logger.info(
        "dataset ready: %d samples, %d features, source=%s",
        X.shape[0], X.shape[1], dataset_info["source"],
    )
    splits = split_and_replicate(y, config.split_fraction, config.replications, master_seed)
    context = {
        "X": X,
        "y": y,
        "graph": graph,
        "feature_labels": feature_labels,
        "nn_options": config.nn_options,
        "gbt_options": config.gbt_options,
        "rf_options": config.rf_options,
        "checkpoint_dir": str(out_dir) if config.save_checkpoints else None,
    }
    tasks = [
        {
            "model": kind,
            "replication": split.replication,
            "seed": derive_seed(master_seed, split.replication, kind),
            "train_idx": split.train_idx,
            "test_idx": split.test_idx,
        }
        for split in splits
        for kind in config.models
    ]
    if n_workers == 1:
        _set_task_context(context)
        results = []
        for task in tasks:
            results.append(_run_task(task))
            logger.info(
                "run complete: replication=%d model=%s error=%s",
                task["replication"], task["model"], results[-1]["error"],
            )
    else:
        with ProcessPoolExecutor(
            max_workers=n_workers,
            initializer=_set_task_context,
            initargs=(context,),
        ) as pool:
            results = list(pool.map(_run_task, tasks))

    run_rows = _merged_run_rows(results)
    with_fs = any("fs_roc_auc" in row for row in run_rows)
    paths = write_result_tables(out_dir, run_rows, config.models, with_fs)
    for result in results:
        if result["error"] is not None:
            continue
        importance_path = out_dir / f"importance_{result['model']}_{result['replication']}.csv"
        write_csv(
            importance_path,
            ("feature", "raw_importance", "pseudo_probability"),
            zip(feature_names, result["importance"], result["pseudo"]),
        )
    failures = [
        {"replication": r["replication"], "model": r["model"], "error": r["error"]}
        for r in results
        if r["error"] is not None
    ]
    manifest = {
        "schema_version": 1,
        "package_version": package_version,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "master_seed": master_seed,
        "workers": n_workers,
        "config": config.echo(),
        "dataset": dataset_info,
        "splits": [
            {
                "replication": split.replication,
                "seed": split.seed,
                "n_train": int(split.train_idx.size),
                "n_test": int(split.test_idx.size),
                "train_positives": int(np.sum(y[split.train_idx] == 1)),
                "test_positives": int(np.sum(y[split.test_idx] == 1)),
            }
            for split in splits
        ],
        "runs": [
            {
                "replication": r["replication"],
                "model": r["model"],
                "seed": r["seed"],
                "status": "failed" if r["error"] is not None else "completed",
                "error": r["error"],
                "wall_time_seconds": r.get("wall_time_seconds"),
            }
            for r in results
        ],
        "n_completed": len(run_rows),
        "n_failed": len(failures),
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True, default=_json_ready)
        handle.write("\n")
    return {
        "output_dir": str(out_dir),
        "n_completed": len(run_rows),
        "n_failed": len(failures),
        "paths": {name: str(path) for name, path in paths.items()},
        "manifest": str(manifest_path),
    }


def reaggregate(runs_csv, feature_selection_csv=None, output_dir=None) -> dict:
    """Rebuild aggregate and Welch tables from previously written run tables.

    Because run tables are serialized losslessly, the rebuilt tables are
    byte-identical to the ones the original run produced.
    """
    runs_csv = Path(runs_csv)
    out_dir = Path(output_dir) if output_dir is not None else runs_csv.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    from .io import read_csv_dicts

    rows = []
    models = []
    for raw in read_csv_dicts(runs_csv):
        row = {"replication": int(raw["replication"]), "model": raw["model"]}
        for metric in METRIC_COLUMNS:
            row[metric] = float(raw[metric])
        rows.append(row)
        if raw["model"] not in models:
            models.append(raw["model"])
    with_fs = False
    if feature_selection_csv is not None and Path(feature_selection_csv).exists():
        with_fs = True
        fs_by_key = {
            (int(raw["replication"]), raw["model"]): raw
            for raw in read_csv_dicts(feature_selection_csv)
        }
        for row in rows:
            raw = fs_by_key.get((row["replication"], row["model"]))
            if raw is not None:
                for metric in FS_COLUMNS:
                    row[metric] = float(raw[metric])
    paths = write_result_tables(out_dir, rows, tuple(models), with_fs)
    return {name: str(path) for name, path in paths.items()}
