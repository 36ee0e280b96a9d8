"""Prediction post-processing, outcomes, and quality metrics.

All functions here are pure over immutable arrays.  Post-processing applies
a rejection threshold: when the top class probability falls below it, the
prediction becomes the rejection class.  The raw top probability is kept as
the confidence either way.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, EmptyVector


class Outcome(str, enum.Enum):
    CORRECT_AND_PREDICTED = "CorrectAndPredicted"
    CORRECT_AND_REJECTED = "CorrectAndRejected"
    INCORRECT_AND_PREDICTED = "IncorrectAndPredicted"
    INCORRECT_AND_REJECTED = "IncorrectAndRejected"

    @property
    def is_correct(self) -> bool:
        return self in (Outcome.CORRECT_AND_PREDICTED, Outcome.CORRECT_AND_REJECTED)


OUTCOME_ORDER = [
    Outcome.CORRECT_AND_PREDICTED,
    Outcome.CORRECT_AND_REJECTED,
    Outcome.INCORRECT_AND_PREDICTED,
    Outcome.INCORRECT_AND_REJECTED,
]


@dataclass(frozen=True)
class PostprocessedPrediction:
    top_class: str
    top_confidence: float
    ranked_classes: tuple[str, ...]


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass
class MetricsReport:
    accuracy: float
    per_class: dict[str, ClassMetrics]
    macro_f1: float
    ece: float
    outcome_counts: dict[str, int]
    total: int
    empty: bool = False

    @classmethod
    def empty_report(cls) -> "MetricsReport":
        return cls(
            accuracy=0.0,
            per_class={},
            macro_f1=0.0,
            ece=0.0,
            outcome_counts={o.value: 0 for o in OUTCOME_ORDER},
            total=0,
            empty=True,
        )


def postprocess(
    probs: np.ndarray, threshold: float, rejection_class: str, classes: tuple[str, ...]
) -> PostprocessedPrediction:
    """Apply the rejection threshold to one probability vector.

    Argmax ties break toward the lower class index; the ranked list never
    contains the rejection class.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size == 0:
        raise EmptyVector("probability vector is empty")
    order = np.argsort(-probs, kind="stable")
    top = int(order[0])
    top_confidence = float(probs[top])
    top_class = classes[top] if top_confidence >= threshold else rejection_class
    return PostprocessedPrediction(
        top_class=top_class,
        top_confidence=top_confidence,
        ranked_classes=tuple(classes[i] for i in order),
    )


def outcome_of(label: str, post: PostprocessedPrediction, rejection_class: str) -> Outcome:
    rejected = post.top_class == rejection_class
    correct = post.top_class == label
    if correct and not rejected:
        return Outcome.CORRECT_AND_PREDICTED
    if correct and rejected:
        return Outcome.CORRECT_AND_REJECTED
    if rejected:
        return Outcome.INCORRECT_AND_REJECTED
    return Outcome.INCORRECT_AND_PREDICTED


@dataclass
class PredictionView:
    """Vectorized post-processing of a whole prediction table at one
    threshold, plus the aligned labels."""

    classes: tuple[str, ...]
    rejection_class: str
    threshold: float
    labels: list[str]
    argmax_index: np.ndarray
    top_confidence: np.ndarray
    rejected: np.ndarray  # bool mask

    @classmethod
    def build(
        cls,
        table: np.ndarray,
        labels: list[str],
        threshold: float,
        rejection_class: str,
        classes: tuple[str, ...],
    ) -> "PredictionView":
        argmax_index = np.argmax(table, axis=1)
        top_confidence = table[np.arange(len(table)), argmax_index]
        return cls(
            classes=classes,
            rejection_class=rejection_class,
            threshold=threshold,
            labels=labels,
            argmax_index=argmax_index,
            top_confidence=top_confidence,
            rejected=top_confidence < threshold,
        )

    def top_class(self, row: int) -> str:
        if self.rejected[row]:
            return self.rejection_class
        return self.classes[int(self.argmax_index[row])]

    def outcome(self, row: int) -> Outcome:
        label = self.labels[row]
        if self.rejected[row]:
            if label == self.rejection_class:
                return Outcome.CORRECT_AND_REJECTED
            return Outcome.INCORRECT_AND_REJECTED
        if self.classes[int(self.argmax_index[row])] == label:
            return Outcome.CORRECT_AND_PREDICTED
        return Outcome.INCORRECT_AND_PREDICTED

    def correct_mask(self) -> np.ndarray:
        labels = np.asarray(self.labels)
        predicted = np.where(
            self.rejected,
            self.rejection_class,
            np.asarray(self.classes, dtype=object)[self.argmax_index],
        )
        return predicted == labels


def compute_metrics(
    view: PredictionView, rows: np.ndarray, ece_bins: int = 10
) -> MetricsReport:
    """Metrics over exactly the given population rows.

    An empty population yields the distinguished empty report rather than
    an error, so impossible filters stay well-defined.  ECE is always
    computed on raw top confidence vs argmax correctness, regardless of
    the view's threshold.
    """
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return MetricsReport.empty_report()

    outcome_counts = {o.value: 0 for o in OUTCOME_ORDER}
    predicted: list[str] = []
    correct_flags = np.zeros(rows.size, dtype=bool)
    for i, row in enumerate(rows):
        out = view.outcome(int(row))
        outcome_counts[out.value] += 1
        correct_flags[i] = out.is_correct
        predicted.append(view.top_class(int(row)))

    total = rows.size
    accuracy = float(correct_flags.sum()) / total
    labels = [view.labels[int(r)] for r in rows]

    class_order = [c for c in view.classes if c in set(labels) | set(predicted)]
    if view.rejection_class in set(labels) | set(predicted):
        class_order.append(view.rejection_class)
    per_class: dict[str, ClassMetrics] = {}
    for cls_name in class_order:
        tp = sum(1 for lab, pred in zip(labels, predicted) if lab == pred == cls_name)
        fp = sum(1 for lab, pred in zip(labels, predicted) if pred == cls_name and lab != cls_name)
        fn = sum(1 for lab, pred in zip(labels, predicted) if lab == cls_name and pred != cls_name)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls_name] = ClassMetrics(precision, recall, f1)
    macro_f1 = (
        sum(m.f1 for m in per_class.values()) / len(per_class) if per_class else 0.0
    )

    argmax_correct = [
        view.classes[int(view.argmax_index[int(r)])] == view.labels[int(r)] for r in rows
    ]
    ece = expected_calibration_error(
        list(zip(view.top_confidence[rows].tolist(), argmax_correct)), ece_bins
    )
    return MetricsReport(
        accuracy=accuracy,
        per_class=per_class,
        macro_f1=macro_f1,
        ece=ece,
        outcome_counts=outcome_counts,
        total=int(total),
    )


def expected_calibration_error(preds: list[tuple[float, bool]], n_bins: int) -> float:
    """Equal-width, right-closed binning over [0, 1].

    ECE = sum over bins of (n_b / N) * |accuracy_b - mean_confidence_b|;
    empty bins contribute zero.  Confidence 1.0 lands in the last bin and
    0.0 in the first.
    """
    if n_bins < 1:
        raise EmptyInput(f"n_bins must be >= 1, got {n_bins}")
    if not preds:
        raise EmptyInput("no (confidence, correctness) pairs")
    conf = np.asarray([p[0] for p in preds], dtype=np.float64)
    correct = np.asarray([p[1] for p in preds], dtype=np.float64)
    # right-closed bins: (b/n, (b+1)/n]; ceil maps 1.0 to the last bin
    idx = np.ceil(conf * n_bins).astype(np.int64) - 1
    idx = np.clip(idx, 0, n_bins - 1)
    total = len(preds)
    ece = 0.0
    for b in range(n_bins):
        mask = idx == b
        n_b = int(mask.sum())
        if n_b == 0:
            continue
        acc_b = float(correct[mask].mean())
        conf_b = float(conf[mask].mean())
        ece += (n_b / total) * abs(acc_b - conf_b)
    return ece


def confusion_matrix(
    view: PredictionView, rows: np.ndarray, normalized: bool = False
) -> tuple[list[str], list[str], np.ndarray]:
    """Rows are true labels, columns are post-processed predictions; the
    rejection class always gets the final row and column."""
    rows = np.asarray(rows, dtype=np.int64)
    class_order = list(view.classes) + [view.rejection_class]
    index = {c: i for i, c in enumerate(class_order)}
    matrix = np.zeros((len(class_order), len(class_order)), dtype=np.float64)
    for row in rows:
        matrix[index[view.labels[int(row)]], index[view.top_class(int(row))]] += 1.0
    if normalized:
        sums = matrix.sum(axis=1, keepdims=True)
        matrix = np.divide(matrix, sums, out=np.zeros_like(matrix), where=sums > 0)
    return class_order, class_order, matrix


@dataclass
class ConfidenceHistogram:
    bin_edges: list[float]
    correct: list[int]
    incorrect: list[int]


def confidence_histogram(
    view: PredictionView, rows: np.ndarray, n_bins: int = 20
) -> ConfidenceHistogram:
    """Equal-width bins over top confidence, split by post-processed
    correctness.  Left-closed floor binning; 1.0 clamps into the last bin."""
    rows = np.asarray(rows, dtype=np.int64)
    correct = np.zeros(n_bins, dtype=np.int64)
    incorrect = np.zeros(n_bins, dtype=np.int64)
    for row in rows:
        conf = float(view.top_confidence[int(row)])
        b = min(int(conf * n_bins), n_bins - 1)
        if view.outcome(int(row)).is_correct:
            correct[b] += 1
        else:
            incorrect[b] += 1
    edges = [i / n_bins for i in range(n_bins + 1)]
    return ConfidenceHistogram(edges, correct.tolist(), incorrect.tolist())


def pipeline_comparison_tags(
    tables: dict[str, np.ndarray],
    thresholds: dict[str, float],
    row: int,
    label: str,
    rejection_class: str,
    classes: tuple[str, ...],
) -> frozenset[str]:
    """Cross-pipeline tags for one utterance; empty unless at least two
    pipelines predicted this split."""
    if len(tables) < 2:
        return frozenset()
    tags = set()
    top_classes = []
    all_incorrect = True
    for pid, table in tables.items():
        post = postprocess(table[row], thresholds[pid], rejection_class, classes)
        top_classes.append(post.top_class)
        if outcome_of(label, post, rejection_class).is_correct:
            all_incorrect = False
    if all_incorrect:
        tags.add("incorrect_for_all_pipelines")
    if len(set(top_classes)) > 1:
        tags.add("pipeline_disagreement")
    return frozenset(tags)


@dataclass
class ThresholdPoint:
    threshold: float
    accuracy: float
    outcome_counts: dict[str, int]


def threshold_sweep(
    table: np.ndarray,
    labels: list[str],
    thresholds: list[float],
    rejection_class: str,
    classes: tuple[str, ...],
    ece_bins: int = 10,
) -> list[ThresholdPoint]:
    """Recompute accuracy and outcome counts at each candidate threshold."""
    points = []
    rows = np.arange(len(labels))
    for threshold in thresholds:
        view = PredictionView.build(table, labels, threshold, rejection_class, classes)
        report = compute_metrics(view, rows, ece_bins)
        points.append(ThresholdPoint(threshold, report.accuracy, report.outcome_counts))
    return points
