"""Strict, versioned YAML configuration for benchmark experiments.

Unknown keys anywhere in the file are rejected with their path, so typos fail
fast instead of silently falling back to defaults.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import yaml

from ..models import MODEL_KINDS
from ..simulate import THRESHOLD_MODES

SCHEMA_VERSION = 1

DATA_SOURCES = ("simulate", "files")
GRAPH_REQUIRING_KINDS = ("enggnn", "gedfn_e")

_TOP_KEYS = {
    "schema_version", "seed", "replications", "split_fraction", "models",
    "workers", "save_checkpoints", "output_dir", "data", "model_options",
}
_SIMULATE_KEYS = {
    "source", "n_samples", "feature_fraction", "true_fraction",
    "attach_count", "threshold", "threshold_mode",
}
_FILES_KEYS = {"source", "matrix", "label_column", "edges"}
_OPTION_SECTIONS = {
    "nn": {
        "hidden_widths", "head_width", "learning_rate", "epochs", "batch_size",
        "dropout_rate", "early_stop_patience", "early_stop_min_delta",
    },
    "gbt": {"n_trees", "max_depth", "shrinkage", "reg_lambda", "gamma", "min_child_weight"},
    "rf": {"n_trees", "max_depth", "mtry", "min_samples_leaf", "bootstrap"},
}


class ConfigError(ValueError):
    """A malformed experiment configuration."""


@dataclass(frozen=True)
class DataConfig:
    source: str
    n_samples: int = 5000
    feature_fraction: float = 0.05
    true_fraction: float = 0.05
    attach_count: int = 2
    threshold: float = 0.6
    threshold_mode: str = "quantile"
    matrix: str | None = None
    label_column: str = "label"
    edges: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    replications: int
    models: tuple
    data: DataConfig
    split_fraction: float = 0.8
    workers: int = 1
    save_checkpoints: bool = False
    output_dir: str = "results"
    nn_options: dict = field(default_factory=dict)
    gbt_options: dict = field(default_factory=dict)
    rf_options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Plain-dict form for the run manifest."""
        return asdict(self)


def _reject_unknown(mapping, allowed, path):
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unrecognized key(s) {unknown} under '{path}'")


def _get(mapping, key, path, required=False, default=None):
    if key not in mapping:
        if required:
            raise ConfigError(f"missing required key '{path}.{key}'")
        return default
    return mapping[key]


def _as_int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{path}' must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"'{path}' must be >= {minimum}, got {value}")
    return value


def _as_number(value, path, low=None, high=None, open_ends=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    value = float(value)
    if low is not None and (value <= low if open_ends else value < low):
        raise ConfigError(f"'{path}' is out of range: {value}")
    if high is not None and (value >= high if open_ends else value > high):
        raise ConfigError(f"'{path}' is out of range: {value}")
    return value


def _as_str(value, path, choices=None):
    if not isinstance(value, str):
        raise ConfigError(f"'{path}' must be a string, got {value!r}")
    if choices is not None and value not in choices:
        raise ConfigError(f"'{path}' must be one of {tuple(choices)}, got {value!r}")
    return value


def _parse_data(raw) -> DataConfig:
    if not isinstance(raw, dict):
        raise ConfigError("'data' must be a mapping")
    source = _as_str(_get(raw, "source", "data", required=True), "data.source", DATA_SOURCES)
    if source == "simulate":
        _reject_unknown(raw, _SIMULATE_KEYS, "data")
        return DataConfig(
            source=source,
            n_samples=_as_int(_get(raw, "n_samples", "data", default=5000), "data.n_samples", 2),
            feature_fraction=_as_number(
                _get(raw, "feature_fraction", "data", default=0.05),
                "data.feature_fraction", 0.0, 1.0, open_ends=False,
            ),
            true_fraction=_as_number(
                _get(raw, "true_fraction", "data", default=0.05),
                "data.true_fraction", 0.0, 1.0, open_ends=False,
            ),
            attach_count=_as_int(_get(raw, "attach_count", "data", default=2), "data.attach_count", 1),
            threshold=_as_number(
                _get(raw, "threshold", "data", default=0.6),
                "data.threshold", 0.0, 1.0, open_ends=True,
            ),
            threshold_mode=_as_str(
                _get(raw, "threshold_mode", "data", default="quantile"),
                "data.threshold_mode", THRESHOLD_MODES,
            ),
        )
    _reject_unknown(raw, _FILES_KEYS, "data")
    edges = _get(raw, "edges", "data")
    return DataConfig(
        source=source,
        matrix=_as_str(_get(raw, "matrix", "data", required=True), "data.matrix"),
        label_column=_as_str(
            _get(raw, "label_column", "data", default="label"), "data.label_column"
        ),
        edges=None if edges is None else _as_str(edges, "data.edges"),
    )


def _parse_options(raw) -> dict:
    if raw is None:
        return {"nn": {}, "gbt": {}, "rf": {}}
    if not isinstance(raw, dict):
        raise ConfigError("'model_options' must be a mapping")
    _reject_unknown(raw, _OPTION_SECTIONS, "model_options")
    sections = {}
    for name, allowed in _OPTION_SECTIONS.items():
        section = raw.get(name) or {}
        if not isinstance(section, dict):
            raise ConfigError(f"'model_options.{name}' must be a mapping")
        _reject_unknown(section, allowed, f"model_options.{name}")
        section = dict(section)
        if name == "nn" and "hidden_widths" in section:
            widths = section["hidden_widths"]
            if not isinstance(widths, list) or not widths:
                raise ConfigError("'model_options.nn.hidden_widths' must be a non-empty list")
            section["hidden_widths"] = tuple(
                _as_int(w, "model_options.nn.hidden_widths[]", 1) for w in widths
            )
        sections[name] = section
    return sections


def parse_config(raw) -> ExperimentConfig:
    """Validate a loaded YAML mapping into an ExperimentConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("the configuration root must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, "<top>")
    version = _as_int(_get(raw, "schema_version", "<top>", required=True), "schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")
    models_raw = _get(raw, "models", "<top>", required=True)
    if not isinstance(models_raw, list) or not models_raw:
        raise ConfigError("'models' must be a non-empty list")
    models = tuple(_as_str(m, "models[]", MODEL_KINDS) for m in models_raw)
    if len(set(models)) != len(models):
        raise ConfigError("'models' contains duplicates")
    data = _parse_data(_get(raw, "data", "<top>", required=True))
    if data.source == "files" and data.edges is None:
        needs_graph = sorted(set(models) & set(GRAPH_REQUIRING_KINDS))
        if needs_graph:
            raise ConfigError(
                f"models {needs_graph} need an external graph: set 'data.edges'"
            )
    options = _parse_options(raw.get("model_options"))
    return ExperimentConfig(
        seed=_as_int(_get(raw, "seed", "<top>", required=True), "seed"),
        replications=_as_int(_get(raw, "replications", "<top>", required=True), "replications", 1),
        models=models,
        data=data,
        split_fraction=_as_number(
            _get(raw, "split_fraction", "<top>", default=0.8),
            "split_fraction", 0.0, 1.0, open_ends=True,
        ),
        workers=_as_int(_get(raw, "workers", "<top>", default=1), "workers", 1),
        save_checkpoints=bool(_get(raw, "save_checkpoints", "<top>", default=False)),
        output_dir=_as_str(_get(raw, "output_dir", "<top>", default="results"), "output_dir"),
        nn_options=options["nn"],
        gbt_options=options["gbt"],
        rf_options=options["rf"],
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML experiment configuration file."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            raw = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ConfigError(f"could not parse {path}: {exc}") from exc
    return parse_config(raw)
