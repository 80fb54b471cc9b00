"""Command-line interface: simulate, run, rank-features, report."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..checkpoint import load_checkpoint
from ..metrics import percentile_rank
from ..models import connection_importance
from ..simulate import SimulationScenario, build_dataset
from .config import ConfigError, load_config
from .experiment import reaggregate, run_experiment
from .io import save_edge_list, save_matrix, write_csv

logger = logging.getLogger(__name__)


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    if config.data.source != "simulate":
        raise ConfigError("the simulate command needs a config with data.source: simulate")
    seed = config.seed if args.seed is None else args.seed
    data = config.data
    scenario = SimulationScenario(
        n_samples=data.n_samples,
        feature_fraction=data.feature_fraction,
        true_fraction=data.true_fraction,
        attach_count=data.attach_count,
        threshold=data.threshold,
        threshold_mode=data.threshold_mode,
        seed=seed,
    )
    dataset = build_dataset(scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_matrix(out_dir / "matrix.csv", dataset.X, dataset.y, dataset.feature_names)
    save_edge_list(out_dir / "edges.tsv", dataset.graph, dataset.feature_names)
    core = set(dataset.core_features.tolist())
    write_csv(
        out_dir / "features.csv",
        ("feature", "is_core", "is_important"),
        (
            (name, int(i in core), int(dataset.feature_labels[i]))
            for i, name in enumerate(dataset.feature_names)
        ),
    )
    manifest = {
        "seed": seed,
        "scenario": {
            "n_samples": scenario.n_samples,
            "feature_fraction": scenario.feature_fraction,
            "true_fraction": scenario.true_fraction,
            "attach_count": scenario.attach_count,
            "threshold": scenario.threshold,
            "threshold_mode": scenario.threshold_mode,
        },
        **dataset.details,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote dataset ({dataset.X.shape[0]} x {dataset.X.shape[1]}) to {out_dir}")
    return 0


def _cmd_run(args) -> int:
    config = load_config(args.config)
    summary = run_experiment(
        config, output_dir=args.out, seed=args.seed, workers=args.workers
    )
    print(
        f"completed {summary['n_completed']} run(s), {summary['n_failed']} failed; "
        f"results in {summary['output_dir']}"
    )
    return 0 if summary["n_failed"] == 0 else 1


def _cmd_rank_features(args) -> int:
    model = load_checkpoint(args.checkpoint)
    importance = connection_importance(model)
    pseudo = percentile_rank(importance)
    order = np.argsort(-pseudo, kind="stable")
    write_csv(
        args.out,
        ("feature", "raw_importance", "pseudo_probability"),
        ((int(i), importance[i], pseudo[i]) for i in order),
    )
    print(f"ranked {importance.size} features into {args.out}")
    return 0


def _cmd_report(args) -> int:
    paths = reaggregate(
        args.runs,
        feature_selection_csv=args.feature_selection,
        output_dir=args.out,
    )
    print("rebuilt " + ", ".join(sorted(paths)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enggnn",
        description="Dual-graph feedforward benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset to files")
    p_sim.add_argument("--config", required=True, help="experiment YAML (data.source: simulate)")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sim.set_defaults(handler=_cmd_simulate)

    p_run = sub.add_parser("run", help="run the benchmark described by a config")
    p_run.add_argument("--config", required=True, help="experiment YAML")
    p_run.add_argument("--out", default=None, help="override the config output_dir")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    p_run.set_defaults(handler=_cmd_run)

    p_rank = sub.add_parser("rank-features", help="rank features from an .npz checkpoint")
    p_rank.add_argument("--checkpoint", required=True, help="model checkpoint (.npz)")
    p_rank.add_argument("--out", required=True, help="output CSV path")
    p_rank.set_defaults(handler=_cmd_rank_features)

    p_report = sub.add_parser("report", help="rebuild aggregate tables from run tables")
    p_report.add_argument("--runs", required=True, help="metrics_runs.csv from a previous run")
    p_report.add_argument(
        "--feature-selection", default=None, help="feature_selection.csv, if produced"
    )
    p_report.add_argument("--out", default=None, help="output directory (default: alongside runs)")
    p_report.set_defaults(handler=_cmd_report)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.handler(args)
    except (ConfigError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
