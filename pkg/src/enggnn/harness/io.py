"""Delimited data/graph files and deterministic CSV writing.

Numeric values are serialized with ``repr(float(x))`` (shortest round-trip
form), so emitted tables parse back to bit-identical floats and reruns with
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import warnings

import numpy as np

from ..graphs import FeatureGraph


def format_value(value) -> str:
    """Lossless, deterministic text form for CSV cells."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows, delimiter: str = ",") -> None:
    """Write rows (iterables of cells) under a header with lossless formatting."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter=delimiter, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(cell) for cell in row])


def read_csv_dicts(path, delimiter: str = ",") -> list:
    """Read a delimited file into a list of per-row dicts of strings."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle, delimiter=delimiter))


def _sniff_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def load_matrix(path, label_column: str = "label"):
    """Load a delimited feature matrix with a label column.

    The delimiter (comma or tab) is sniffed from the header. Every non-label
    cell must parse as a float and labels must be 0 or 1; ragged or malformed
    rows fail with their line number. Returns ``(X, y, feature_names)``.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        first = handle.readline()
        if not first.strip():
            raise ValueError(f"{path}: empty file or blank header")
        delimiter = _sniff_delimiter(first)
        header = next(csv.reader([first], delimiter=delimiter))
        if label_column not in header:
            raise ValueError(f"{path}: label column '{label_column}' not found in header")
        label_idx = header.index(label_column)
        feature_names = [name for i, name in enumerate(header) if i != label_idx]
        if not feature_names:
            raise ValueError(f"{path}: no feature columns besides the label")
        features = []
        labels = []
        for line_no, row in enumerate(csv.reader(handle, delimiter=delimiter), start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: line {line_no} has {len(row)} fields, expected {len(header)}"
                )
            values = []
            for idx, cell in enumerate(row):
                if idx == label_idx:
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: line {line_no}, column '{header[idx]}': "
                        f"could not parse {cell!r} as a number"
                    ) from None
            label_cell = row[label_idx].strip()
            if label_cell not in ("0", "1"):
                raise ValueError(
                    f"{path}: line {line_no}: label must be 0 or 1, got {label_cell!r}"
                )
            features.append(values)
            labels.append(int(label_cell))
    if not features:
        raise ValueError(f"{path}: no data rows")
    X = np.asarray(features, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{path}: matrix contains non-finite values")
    return X, np.asarray(labels, dtype=np.int64), feature_names


def save_matrix(path, X, y, feature_names, label_column: str = "label",
                delimiter: str = ",") -> None:
    """Write a feature matrix plus label column in lossless text form."""
    X = np.asarray(X)
    if X.shape[1] != len(feature_names):
        raise ValueError("feature_names length does not match X")
    if X.shape[0] != len(y):
        raise ValueError("y length does not match X")
    header = list(feature_names) + [label_column]
    rows = (list(X[i]) + [int(y[i])] for i in range(X.shape[0]))
    write_csv(path, header, rows, delimiter=delimiter)


def load_edge_list(path, feature_names) -> FeatureGraph:
    """Load an undirected two-column (optionally three-column) TSV edge list.

    Endpoints are matched against ``feature_names``; edges touching unknown
    names are skipped and reported once in a warning with their count. A third
    column (e.g. a weight or interaction type) is ignored, also with a single
    warning. Blank lines are allowed.
    """
    index = {name: i for i, name in enumerate(feature_names)}
    edges = []
    skipped = 0
    saw_extra_column = False
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) == 3:
                saw_extra_column = True
            elif len(fields) != 2:
                raise ValueError(
                    f"{path}: line {line_no} has {len(fields)} fields, expected 2 or 3"
                )
            u, v = fields[0].strip(), fields[1].strip()
            if u in index and v in index:
                edges.append((index[u], index[v]))
            else:
                skipped += 1
    if saw_extra_column:
        warnings.warn(
            f"{path}: edge list has a third column; it was ignored",
            UserWarning, stacklevel=2,
        )
    if skipped:
        warnings.warn(
            f"{path}: skipped {skipped} edge(s) with endpoints not in the feature set",
            UserWarning, stacklevel=2,
        )
    if not edges:
        warnings.warn(
            f"{path}: no usable edges; the graph mask reduces to self-loops only",
            UserWarning, stacklevel=2,
        )
    return FeatureGraph(len(feature_names), edges, directed=False)


def save_edge_list(path, graph: FeatureGraph, feature_names) -> None:
    """Write a graph as a two-column TSV of feature names, sorted for determinism."""
    if len(feature_names) != graph.node_count:
        raise ValueError("feature_names length does not match the graph")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for u, v in sorted(graph.edges):
            handle.write(f"{feature_names[u]}\t{feature_names[v]}\n")
