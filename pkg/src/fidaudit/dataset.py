"""Tabular dataset loading, encoding, and splitting.

Input format: comma-separated UTF-8 text with a header row and '.' as the
decimal separator. A schema (JSON list of column descriptors) declares each
column's kind and role:

    [{"name": "race", "kind": "categorical", "sensitive": true, "target": false}, ...]

Encoding rules (shared contract with the importance exporter):
  * columns are encoded sensitive-first, then safe, each in schema order;
  * numeric and binary columns map to a single encoded column of the same name;
  * categorical columns expand to one-hot columns named "<col>=<level>",
    levels sorted lexicographically, no reference level dropped;
  * the target column is never part of the encoded feature matrix;
  * the sensitive matrix carries a trailing constant-1 bias column so linear
    threshold subgroups can express offsets.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDatasetError, ParseError, SchemaError, SplitError

VALID_KINDS = ("numeric", "binary", "categorical")
BIAS_NAME = "bias"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    sensitive: bool = False
    target: bool = False


def validate_schema(schema: list[ColumnSchema]) -> None:
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate column names in schema")
    for col in schema:
        if col.kind not in VALID_KINDS:
            raise SchemaError(f"column {col.name!r}: unknown kind {col.kind!r}")
    targets = [c for c in schema if c.target]
    if len(targets) != 1:
        raise SchemaError(f"schema must declare exactly one target column, got {len(targets)}")
    if targets[0].kind == "categorical":
        raise SchemaError("target column must be numeric or binary")
    if not any(c.sensitive for c in schema if not c.target):
        raise SchemaError("schema must declare at least one sensitive column")


def load_schema(path) -> list[ColumnSchema]:
    """Read a schema JSON document and validate it."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise SchemaError("schema JSON must be a list of column descriptors")
    schema = []
    for entry in raw:
        try:
            schema.append(
                ColumnSchema(
                    name=entry["name"],
                    kind=entry["kind"],
                    sensitive=bool(entry.get("sensitive", False)),
                    target=bool(entry.get("target", False)),
                )
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad schema entry {entry!r}") from exc
    validate_schema(schema)
    return schema


@dataclass
class Dataset:
    """Encoded dataset with the sensitive/safe column partition.

    ``sensitive_matrix`` includes the trailing bias column;
    ``feature_names`` covers the model-facing features (sensitive without
    bias, then safe) and matches the importance-file header contract.
    """

    sensitive_matrix: np.ndarray
    safe_matrix: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    sensitive_feature_names: list[str]  # includes trailing "bias"
    encoding_map: dict[str, list[int]]
    sensitive_columns: list[dict] = field(default_factory=list)
    row_indices: np.ndarray | None = None

    def __post_init__(self):
        if self.row_indices is None:
            self.row_indices = np.arange(self.sensitive_matrix.shape[0])

    @property
    def n(self) -> int:
        return self.sensitive_matrix.shape[0]

    @property
    def d_sens(self) -> int:
        return self.sensitive_matrix.shape[1]

    @property
    def d(self) -> int:
        return len(self.feature_names)

    @property
    def feature_matrix(self) -> np.ndarray:
        """Model-facing matrix: sensitive block without bias, then safe block."""
        return np.hstack([self.sensitive_matrix[:, :-1], self.safe_matrix])

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            sensitive_matrix=self.sensitive_matrix[idx],
            safe_matrix=self.safe_matrix[idx],
            labels=self.labels[idx],
            feature_names=self.feature_names,
            sensitive_feature_names=self.sensitive_feature_names,
            encoding_map=self.encoding_map,
            sensitive_columns=self.sensitive_columns,
            row_indices=self.row_indices[idx],
        )

    def decode_feature(self, index: int) -> str:
        """Original column name for an encoded feature index."""
        for name, idxs in self.encoding_map.items():
            if index in idxs:
                return name
        raise KeyError(index)


@dataclass
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    fraction: float
    train_indices: np.ndarray = None
    test_indices: np.ndarray = None


def _parse_cell(raw: str, col: ColumnSchema, row_idx: int):
    if col.kind == "categorical":
        return raw
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(
            f"row {row_idx}: cannot parse {raw!r} as {col.kind} for column {col.name!r}",
            row=row_idx,
            column=col.name,
        ) from None
    if not math.isfinite(value):
        raise ParseError(
            f"row {row_idx}: non-finite value in column {col.name!r}",
            row=row_idx,
            column=col.name,
        )
    if col.kind == "binary" and value not in (0.0, 1.0):
        raise ParseError(
            f"row {row_idx}: binary column {col.name!r} holds {raw!r}, expected 0 or 1",
            row=row_idx,
            column=col.name,
        )
    return value


def load_dataset(path, schema: list[ColumnSchema], standardize: bool = False) -> Dataset:
    """Load and encode a CSV file under the given schema.

    Row order of the file is preserved (required for importance alignment).
    ``standardize=True`` z-scores numeric non-target columns; off by default
    because threshold geometry is scale sensitive.
    """
    validate_schema(schema)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        col_pos = {}
        for col in schema:
            if col.name not in header:
                raise SchemaError(f"column {col.name!r} missing from file header")
            col_pos[col.name] = header.index(col.name)
        raw_columns: dict[str, list] = {c.name: [] for c in schema}
        for row_idx, row in enumerate(reader):
            if not row or all(not cell.strip() for cell in row):
                continue
            for col in schema:
                pos = col_pos[col.name]
                if pos >= len(row):
                    raise ParseError(f"row {row_idx}: too few fields", row=row_idx)
                raw_columns[col.name].append(_parse_cell(row[pos].strip(), col, row_idx))

    n = len(raw_columns[schema[0].name])
    if n == 0:
        raise EmptyDatasetError(f"{path}: no data rows")

    target_col = next(c for c in schema if c.target)
    labels = np.asarray(raw_columns[target_col.name], dtype=float)

    def encode(col: ColumnSchema):
        """Return (encoded block, encoded names) for one original column."""
        if col.kind == "categorical":
            values = raw_columns[col.name]
            levels = sorted(set(values))
            if len(levels) == 1:
                warnings.warn(
                    f"categorical column {col.name!r} has a single level; "
                    "its one-hot column is identically 1"
                )
            block = np.zeros((n, len(levels)))
            level_pos = {lv: k for k, lv in enumerate(levels)}
            for i, v in enumerate(values):
                block[i, level_pos[v]] = 1.0
            names = [f"{col.name}={lv}" for lv in levels]
            return block, names
        column = np.asarray(raw_columns[col.name], dtype=float)[:, None]
        if standardize and col.kind == "numeric":
            mu, sd = column.mean(), column.std()
            if sd > 0:
                column = (column - mu) / sd
        return column, [col.name]

    feature_names: list[str] = []
    encoding_map: dict[str, list[int]] = {}
    sens_blocks, safe_blocks = [], []
    sensitive_columns: list[dict] = []
    ordered = [c for c in schema if c.sensitive and not c.target] + [
        c for c in schema if not c.sensitive and not c.target
    ]
    for col in ordered:
        block, names = encode(col)
        start = len(feature_names)
        feature_names.extend(names)
        encoding_map[col.name] = list(range(start, start + len(names)))
        if col.sensitive:
            sensitive_columns.append(
                {"name": col.name, "kind": col.kind, "indices": encoding_map[col.name]}
            )
            sens_blocks.append(block)
        else:
            safe_blocks.append(block)

    sens = np.hstack(sens_blocks) if sens_blocks else np.zeros((n, 0))
    safe = np.hstack(safe_blocks) if safe_blocks else np.zeros((n, 0))
    sensitive_matrix = np.hstack([sens, np.ones((n, 1))])
    sensitive_feature_names = [feature_names[i] for c in sensitive_columns for i in c["indices"]]
    sensitive_feature_names.append(BIAS_NAME)

    for name, mat in (("sensitive", sensitive_matrix), ("safe", safe), ("labels", labels)):
        if not np.all(np.isfinite(mat)):
            raise ParseError(f"non-finite entries in {name} block after encoding")

    return Dataset(
        sensitive_matrix=sensitive_matrix,
        safe_matrix=safe,
        labels=labels,
        feature_names=feature_names,
        sensitive_feature_names=sensitive_feature_names,
        encoding_map=encoding_map,
        sensitive_columns=sensitive_columns,
    )


def default_split_fraction(n: int) -> float:
    """0.8 for datasets with at least 1000 rows, 0.5 for small ones."""
    return 0.8 if n >= 1000 else 0.5


def split(ds: Dataset, fraction: float, seed: int) -> SplitPair:
    """Deterministic uniform-shuffle split; train size is floor(fraction * n)."""
    if not 0.0 < fraction < 1.0:
        raise SplitError(f"fraction must be in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n)
    n_train = int(math.floor(fraction * ds.n))
    if n_train == 0 or n_train == ds.n:
        raise SplitError(f"split of {ds.n} rows at {fraction} leaves one side empty")
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return SplitPair(
        train=ds.subset(train_idx),
        test=ds.subset(test_idx),
        seed=seed,
        fraction=fraction,
        train_indices=train_idx,
        test_indices=test_idx,
    )
