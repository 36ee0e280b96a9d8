"""On-disk artifact formats.

Line-record files (datasets, predictions, saliency, syntax, perturbed
predictions) hold one JSON object per line, UTF-8.  Matrix files
(embeddings, MC samples) start with a single ASCII header line
``rows dim`` or ``rows dim samples`` followed by raw little-endian float32
values; MC values are ordered row-major as (row, sample, class).
Alignment with the owning split is positional: line/row i belongs to
utterance id i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import IoError, MalformedRow, RowCountMismatch


@dataclass(frozen=True)
class SaliencyRow:
    id: int
    tokens: tuple[str, ...]
    scores: tuple[float, ...]


@dataclass(frozen=True)
class SyntaxRow:
    id: int
    has_subject: bool
    has_verb: bool
    has_object: bool
    token_count_override: int | None = None


def _iter_json_lines(path: str | Path) -> Iterator[tuple[int, dict]]:
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRow(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise MalformedRow(f"{path}:{lineno}: record must be an object")
            yield lineno, record


def _record_field(record: dict, key: str, path, lineno: int):
    if key not in record:
        raise MalformedRow(f"{path}:{lineno}: missing field {key!r}")
    return record[key]


def read_dataset(path: str | Path) -> list[dict]:
    """Read dataset line records {id, text, label}; ids must be 0..N-1."""
    rows = []
    for lineno, record in _iter_json_lines(path):
        rid = _record_field(record, "id", path, lineno)
        text = _record_field(record, "text", path, lineno)
        label = _record_field(record, "label", path, lineno)
        if not isinstance(rid, int) or rid < 0:
            raise MalformedRow(f"{path}:{lineno}: id must be a non-negative integer")
        if rid != len(rows):
            raise MalformedRow(
                f"{path}:{lineno}: id {rid} breaks the positional order (expected {len(rows)})"
            )
        if not isinstance(text, str) or not text.strip():
            raise MalformedRow(f"{path}:{lineno}: text must be a non-empty string")
        rows.append({"id": rid, "text": text, "label": str(label)})
    return rows


def read_predictions(path: str | Path, n_rows: int, n_classes: int) -> np.ndarray:
    """Read prediction line records {id, probs} into an (n_rows, n_classes)
    float64 array aligned by position."""
    rows: list[list[float]] = []
    for lineno, record in _iter_json_lines(path):
        rid = _record_field(record, "id", path, lineno)
        probs = _record_field(record, "probs", path, lineno)
        if rid != len(rows):
            raise MalformedRow(f"{path}:{lineno}: id {rid} does not match row {len(rows)}")
        if not isinstance(probs, list) or len(probs) != n_classes:
            raise MalformedRow(f"{path}:{lineno}: probs must list {n_classes} floats")
        rows.append([float(p) for p in probs])
    if len(rows) != n_rows:
        raise RowCountMismatch(f"{path}: has {len(rows)} rows, split has {n_rows}")
    return np.asarray(rows, dtype=np.float64)


def read_saliency(path: str | Path, n_rows: int) -> list[SaliencyRow]:
    rows: list[SaliencyRow] = []
    for lineno, record in _iter_json_lines(path):
        rid = _record_field(record, "id", path, lineno)
        tokens = _record_field(record, "tokens", path, lineno)
        scores = _record_field(record, "scores", path, lineno)
        if len(rows) < n_rows and rid != len(rows):
            raise MalformedRow(f"{path}:{lineno}: id {rid} does not match row {len(rows)}")
        if len(tokens) != len(scores):
            raise MalformedRow(f"{path}:{lineno}: tokens and scores lengths differ")
        if any((not isinstance(s, (int, float))) or s < 0 for s in scores):
            raise MalformedRow(f"{path}:{lineno}: saliency scores must be non-negative numbers")
        rows.append(
            SaliencyRow(
                id=int(rid),
                tokens=tuple(str(t) for t in tokens),
                scores=tuple(float(s) for s in scores),
            )
        )
    if len(rows) != n_rows:
        raise RowCountMismatch(f"{path}: has {len(rows)} rows, split has {n_rows}")
    return rows


def read_syntax(path: str | Path, n_rows: int) -> list[SyntaxRow]:
    rows: list[SyntaxRow] = []
    for lineno, record in _iter_json_lines(path):
        rid = _record_field(record, "id", path, lineno)
        flags = []
        for key in ("has_subject", "has_verb", "has_object"):
            value = _record_field(record, key, path, lineno)
            if not isinstance(value, bool):
                raise MalformedRow(f"{path}:{lineno}: {key} must be a boolean")
            flags.append(value)
        if len(rows) < n_rows and rid != len(rows):
            raise MalformedRow(f"{path}:{lineno}: id {rid} does not match row {len(rows)}")
        override = record.get("token_count_override")
        if override is not None and (not isinstance(override, int) or override < 0):
            raise MalformedRow(f"{path}:{lineno}: token_count_override must be a non-negative integer")
        rows.append(SyntaxRow(int(rid), *flags, token_count_override=override))
    if len(rows) != n_rows:
        raise RowCountMismatch(f"{path}: has {len(rows)} rows, split has {n_rows}")
    return rows


def read_perturbed_predictions(
    path: str | Path, n_classes: int
) -> dict[tuple[int, str], np.ndarray]:
    """Read perturbed-prediction records {id, test_name, probs} keyed by
    (utterance id, test name)."""
    table: dict[tuple[int, str], np.ndarray] = {}
    for lineno, record in _iter_json_lines(path):
        rid = _record_field(record, "id", path, lineno)
        test_name = _record_field(record, "test_name", path, lineno)
        probs = _record_field(record, "probs", path, lineno)
        if not isinstance(probs, list) or len(probs) != n_classes:
            raise MalformedRow(f"{path}:{lineno}: probs must list {n_classes} floats")
        table[(int(rid), str(test_name))] = np.asarray(probs, dtype=np.float64)
    return table


def read_matrix(path: str | Path, n_rows: int, with_samples: bool = False) -> np.ndarray:
    """Read a binary matrix file.

    Returns (rows, dim) for embeddings or (rows, samples, dim) for MC
    sample tables.  The stored dtype is float32; values are widened to
    float64 for downstream arithmetic.
    """
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc
    with fh:
        header = fh.readline().decode("ascii", errors="replace").split()
        expected = 3 if with_samples else 2
        if len(header) != expected:
            raise MalformedRow(
                f"{path}:1: header must be {'rows dim samples' if with_samples else 'rows dim'}"
            )
        try:
            dims = [int(x) for x in header]
        except ValueError:
            raise MalformedRow(f"{path}:1: non-integer header fields {header}")
        if any(d <= 0 for d in dims):
            raise MalformedRow(f"{path}:1: header fields must be positive, got {dims}")
        rows, dim = dims[0], dims[1]
        samples = dims[2] if with_samples else 1
        if rows != n_rows:
            raise RowCountMismatch(f"{path}: has {rows} rows, split has {n_rows}")
        data = np.frombuffer(fh.read(), dtype="<f4")
        if data.size != rows * dim * samples:
            raise MalformedRow(
                f"{path}: expected {rows * dim * samples} float32 values, found {data.size}"
            )
    data = data.astype(np.float64)
    if with_samples:
        return data.reshape(rows, samples, dim)
    return data.reshape(rows, dim)


# --- writers (used by tests, fixtures, and the action export) ---

def write_jsonl(path: str | Path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_matrix(path: str | Path, array: np.ndarray) -> None:
    """Write an embedding matrix (rows, dim) or MC table (rows, samples, dim)."""
    array = np.asarray(array)
    if array.ndim == 2:
        header = f"{array.shape[0]} {array.shape[1]}\n"
    elif array.ndim == 3:
        header = f"{array.shape[0]} {array.shape[2]} {array.shape[1]}\n"
    else:
        raise ValueError("matrix must be 2-D or 3-D")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(array.astype("<f4").tobytes())
