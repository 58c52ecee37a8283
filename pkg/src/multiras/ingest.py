"""File formats: long-format CSV tensors, margin manifests, IO-table manifests.

Tensors travel as long-format CSV: one header row naming each dimension
plus a final ``value`` column, then one row per cell with the dimension
labels followed by a nonnegative decimal. The Cartesian product of the
labels seen in each dimension must be enumerated exactly once (dense
contract). Dimension order is column order; label order within a
dimension is first-appearance order. Values are written with ``repr`` so
they round-trip bit-exactly. Everything is UTF-8, comma-separated, ``.``
decimal point, no locale handling.

A margin set is one CSV per margin plus a JSON manifest::

    {"tensor_dims": ["row", "col", "region"],
     "margins": [{"file": "margin_drop_row.csv", "dropped_dim": "row"}, ...]}

An IO table is a JSON manifest mapping "flows", "u1", "u2", "p", "v1",
"v2" to tensor files (flows 2-D, the rest 1-D).
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import (
    DuplicateCellError,
    MissingCellError,
    NegativeValueError,
    ParseError,
)
from .io_analysis import IOTable
from .tensor import MarginSet, Tensor

VALUE_COLUMN = "value"


def read_tensor(path) -> Tensor:
    """Parse a long-format CSV file into a tensor."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path=path, line=1) from None
        if len(header) < 2:
            raise ParseError(
                "header must name at least one dimension plus the value column",
                path=path,
                line=1,
            )
        if header[-1] != VALUE_COLUMN:
            raise ParseError(
                f"last column must be named {VALUE_COLUMN!r}, got {header[-1]!r}",
                path=path,
                line=1,
            )
        names = header[:-1]
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate dimension names in header: {names}", path=path, line=1)

        label_maps = [{} for _ in names]  # label -> index, first-appearance order
        cells = {}  # label tuple -> (line, value)
        for row in reader:
            line = reader.line_num
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(row)}", path=path, line=line
                )
            labels = tuple(row[:-1])
            try:
                value = float(row[-1])
            except ValueError:
                raise ParseError(
                    f"invalid numeric value {row[-1]!r}", path=path, line=line
                ) from None
            if not math.isfinite(value):
                raise ParseError(f"value must be finite, got {row[-1]!r}", path=path, line=line)
            if value < 0.0:
                raise NegativeValueError(
                    f"negative value {row[-1]!r}", path=path, line=line
                )
            if labels in cells:
                raise DuplicateCellError(
                    f"cell {labels} already defined on line {cells[labels][0]}",
                    path=path,
                    line=line,
                )
            cells[labels] = (line, value)
            for lab, lmap in zip(labels, label_maps):
                lmap.setdefault(lab, len(lmap))

    if not cells:
        raise ParseError("no data rows", path=path, line=1)

    shape = tuple(len(lmap) for lmap in label_maps)
    expected = math.prod(shape)
    if len(cells) != expected:
        for combo in itertools.product(*label_maps):
            if combo not in cells:
                raise MissingCellError(f"missing cell {combo}", path=path)

    arr = np.empty(shape, dtype=np.float64)
    for labels, (_, value) in cells.items():
        arr[tuple(lmap[lab] for lab, lmap in zip(labels, label_maps))] = value
    return Tensor(arr, names, tuple(tuple(lmap) for lmap in label_maps))


def write_grid(path, dim_names, labels, values) -> None:
    """Write any float grid (signed values allowed) in the long CSV format."""
    values = np.asarray(values, dtype=np.float64)
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*dim_names, VALUE_COLUMN])
        for index in np.ndindex(*values.shape):
            writer.writerow(
                [*(labels[k][i] for k, i in enumerate(index)), repr(float(values[index]))]
            )


def write_tensor(t: Tensor, path) -> None:
    """Write a tensor in the long CSV format (reads back bit-identically)."""
    write_grid(path, t.dim_names, t.labels, t.values)


def read_tensor_wide(path, row_name=None, col_name="col") -> Tensor:
    """Convenience reader for 2-D wide CSV: header = column labels, one row per row label."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", path=path, line=1) from None
        if len(header) < 2:
            raise ParseError("wide format needs at least one column label", path=path, line=1)
        col_labels = header[1:]
        row_labels = []
        rows = []
        for row in reader:
            line = reader.line_num
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(row)}", path=path, line=line
                )
            row_labels.append(row[0])
            try:
                values = [float(v) for v in row[1:]]
            except ValueError:
                raise ParseError("invalid numeric value", path=path, line=line) from None
            if any(v < 0.0 for v in values):
                raise NegativeValueError("negative value", path=path, line=line)
            rows.append(values)
    if not rows:
        raise ParseError("no data rows", path=path, line=1)
    if len(set(row_labels)) != len(row_labels):
        raise DuplicateCellError("duplicate row label", path=path)
    name0 = row_name if row_name is not None else (header[0] or "row")
    return Tensor(np.asarray(rows), (name0, col_name), (tuple(row_labels), tuple(col_labels)))


def read_margins(manifest_path) -> MarginSet:
    """Read a margin-set manifest plus its per-margin CSV files."""
    manifest_path = Path(manifest_path)
    raw = _load_json(manifest_path)
    try:
        tensor_dims = [str(n) for n in raw["tensor_dims"]]
        entries = list(raw["margins"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"manifest missing key: {exc}", path=manifest_path) from None
    if len(set(tensor_dims)) != len(tensor_dims):
        raise ParseError("tensor_dims must be unique", path=manifest_path)

    by_dropped = {}
    for entry in entries:
        try:
            file_name = entry["file"]
            dropped = str(entry["dropped_dim"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"margin entry missing key: {exc}", path=manifest_path) from None
        if dropped not in tensor_dims:
            raise ParseError(
                f"dropped_dim {dropped!r} is not one of tensor_dims {tensor_dims}",
                path=manifest_path,
            )
        if dropped in by_dropped:
            raise ParseError(f"dimension {dropped!r} dropped twice", path=manifest_path)
        by_dropped[dropped] = manifest_path.parent / file_name
    if set(by_dropped) != set(tensor_dims):
        missing = sorted(set(tensor_dims) - set(by_dropped))
        raise ParseError(f"no margin file for dimension(s) {missing}", path=manifest_path)

    margins = []
    for d, dropped in enumerate(tensor_dims):
        t = read_tensor(by_dropped[dropped])
        expected = tuple(n for n in tensor_dims if n != dropped)
        if t.dim_names != expected:
            raise ParseError(
                f"margin file for dropped dimension {dropped!r} has dimensions "
                f"{t.dim_names}, expected {expected}",
                path=by_dropped[dropped],
            )
        margins.append(t)
    return MarginSet(margins, parent_dim_names=tuple(tensor_dims))


def write_margins(margins: MarginSet, directory, stem="margins") -> Path:
    """Write one CSV per margin plus the JSON manifest; returns the manifest path."""
    if margins.parent_dim_names is None:
        raise ValueError("margin set has no parent dimension names to write")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    parent_names = margins.parent_dim_names
    entries = []
    for dropped, margin in zip(parent_names, margins):
        file_name = f"{stem}_drop_{dropped}.csv"
        # margin headers follow the manifest's parent naming, whatever the
        # in-memory tensors were called
        names = tuple(n for n in parent_names if n != dropped)
        write_grid(directory / file_name, names, margin.labels, margin.values)
        entries.append({"file": file_name, "dropped_dim": dropped})
    manifest = {"tensor_dims": list(margins.parent_dim_names), "margins": entries}
    manifest_path = directory / f"{stem}.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest_path


IO_TABLE_KEYS = ("flows", "u1", "u2", "p", "v1", "v2")


def read_io_table(source) -> IOTable:
    """Read an IO table from a JSON manifest path or a key -> path mapping.

    The flows file must be a square 2-D tensor and the four border vectors
    1-D tensors of matching length; the accounting identities are
    validated on construction.
    """
    if isinstance(source, Mapping):
        base = Path(".")
        raw = dict(source)
        where = None
    else:
        where = Path(source)
        base = where.parent
        raw = _load_json(where)
    missing = [k for k in IO_TABLE_KEYS if k not in raw]
    if missing:
        raise ParseError(f"IO manifest missing key(s) {missing}", path=where)

    flows = read_tensor(base / raw["flows"])
    if flows.ndim != 2 or flows.shape[0] != flows.shape[1]:
        raise ParseError(
            f"flows must be a square matrix, got shape {flows.shape}",
            path=base / raw["flows"],
        )
    vectors = {}
    for key in IO_TABLE_KEYS[1:]:
        t = read_tensor(base / raw[key])
        if t.ndim != 1:
            raise ParseError(f"{key} must be 1-dimensional", path=base / raw[key])
        vectors[key] = t.values
    return IOTable(flows, **vectors)


def _load_json(path: Path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", path=path, line=exc.lineno) from None
