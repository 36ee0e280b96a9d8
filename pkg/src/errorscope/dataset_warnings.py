"""Dashboard-level dataset warnings.

Each warning is a deterministic function of split contents and the config
thresholds.  The shift test is a plain absolute proportion delta so the
evidence numbers on the dashboard explain themselves.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .config import Thresholds
from .formats import SyntaxRow
from .ingestion import DatasetSplit
from .syntax import word_token_count


class WarningKind(str, enum.Enum):
    CLASS_TOO_SMALL = "ClassTooSmall"
    CLASS_PROPORTION_SHIFT = "ClassProportionShift"
    MISSING_CLASS = "MissingClass"
    LENGTH_MISMATCH = "LengthMismatch"


@dataclass(frozen=True)
class DatasetWarning:
    kind: WarningKind
    severity: str  # "info" | "warning"
    class_name: str | None
    evidence: dict[str, float]
    split: str | None = None


def class_size_warnings(split: DatasetSplit, thresholds: Thresholds) -> list[DatasetWarning]:
    """One ClassTooSmall warning per observed class strictly below the
    minimum count."""
    counts = Counter(u.label for u in split.utterances)
    warnings = []
    for class_name in sorted(counts):
        count = counts[class_name]
        if count < thresholds.min_per_class:
            warnings.append(
                DatasetWarning(
                    kind=WarningKind.CLASS_TOO_SMALL,
                    severity="warning",
                    class_name=class_name,
                    evidence={"count": float(count), "min_per_class": float(thresholds.min_per_class)},
                    split=split.name,
                )
            )
    return warnings


def split_shift_warnings(
    train: DatasetSplit, eval_split: DatasetSplit, thresholds: Thresholds
) -> list[DatasetWarning]:
    """Missing classes and class-proportion shifts between two splits.

    A class absent from one split is the zero-proportion case of the same
    rule: it warns (as MissingClass) only when its proportion gap exceeds
    the delta, so the degenerate delta of 1.0 silences the module entirely.
    """
    c_train = Counter(u.label for u in train.utterances)
    c_eval = Counter(u.label for u in eval_split.utterances)
    n_train = max(len(train), 1)
    n_eval = max(len(eval_split), 1)
    warnings = []
    for class_name in sorted(set(c_train) | set(c_eval)):
        in_train = class_name in c_train
        in_eval = class_name in c_eval
        p_train = c_train.get(class_name, 0) / n_train
        p_eval = c_eval.get(class_name, 0) / n_eval
        if abs(p_train - p_eval) <= thresholds.proportion_delta:
            continue
        if not (in_train and in_eval):
            warnings.append(
                DatasetWarning(
                    kind=WarningKind.MISSING_CLASS,
                    severity="warning",
                    class_name=class_name,
                    evidence={
                        "count_train": float(c_train.get(class_name, 0)),
                        "count_eval": float(c_eval.get(class_name, 0)),
                    },
                    split=train.name if not in_train else eval_split.name,
                )
            )
        else:
            warnings.append(
                DatasetWarning(
                    kind=WarningKind.CLASS_PROPORTION_SHIFT,
                    severity="warning",
                    class_name=class_name,
                    evidence={
                        "p_train": p_train,
                        "p_eval": p_eval,
                        "delta": thresholds.proportion_delta,
                    },
                )
            )
    return warnings


@dataclass
class LengthStats:
    mean: float = 0.0
    std: float = 0.0


def _length_stats(split: DatasetSplit, syntax_rows: list[SyntaxRow] | None) -> LengthStats:
    counts = [
        word_token_count(u.text, syntax_rows[i] if syntax_rows else None)
        for i, u in enumerate(split.utterances)
    ]
    if not counts:
        return LengthStats()
    arr = np.asarray(counts, dtype=np.float64)
    return LengthStats(mean=float(arr.mean()), std=float(arr.std()))


def length_mismatch_warning(
    train: DatasetSplit,
    eval_split: DatasetSplit,
    thresholds: Thresholds,
    syntax: dict[str, list[SyntaxRow]] | None = None,
) -> list[DatasetWarning]:
    """Flag a word-token length mismatch between splits (population std)."""
    syntax = syntax or {}
    s_train = _length_stats(train, syntax.get(train.name))
    s_eval = _length_stats(eval_split, syntax.get(eval_split.name))
    mean_gap = abs(s_train.mean - s_eval.mean)
    std_gap = abs(s_train.std - s_eval.std)
    if mean_gap > thresholds.mean_delta_tokens or std_gap > thresholds.std_delta_tokens:
        return [
            DatasetWarning(
                kind=WarningKind.LENGTH_MISMATCH,
                severity="warning",
                class_name=None,
                evidence={
                    "mean_train": s_train.mean,
                    "mean_eval": s_eval.mean,
                    "std_train": s_train.std,
                    "std_eval": s_eval.std,
                    "mean_delta_tokens": thresholds.mean_delta_tokens,
                    "std_delta_tokens": thresholds.std_delta_tokens,
                },
            )
        ]
    return []
