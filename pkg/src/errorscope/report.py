"""Offline report: figures plus delimited summaries for a project.

Renders the same quantities the dashboard serves (warnings, metrics,
confidence histogram, confusion matrix, threshold sweep, word importance,
behavioral failure rates) into PNG figures and CSV files under an output
directory, one pass per split and pipeline.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .engine import AnalysisEngine
from .errors import MissingSaliency
from .prediction import OUTCOME_ORDER
from .tagging import FilterSpec

FIGURE_DPI = 150


def _save(fig, path: Path, written: list[Path]) -> None:
    fig.savefig(path, dpi=FIGURE_DPI, bbox_inches="tight")
    plt.close(fig)
    written.append(path)


def _write_csv(path: Path, header: list[str], rows: list[list], written: list[Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    written.append(path)


def plot_confidence_histogram(hist, title: str):
    fig, ax = plt.subplots(figsize=(7, 4))
    edges = np.asarray(hist.bin_edges[:-1])
    width = hist.bin_edges[1] - hist.bin_edges[0]
    ax.bar(edges, hist.correct, width=width, align="edge", color="#2e7d32", label="correct")
    ax.bar(
        edges,
        hist.incorrect,
        width=width,
        align="edge",
        bottom=hist.correct,
        color="#c62828",
        label="incorrect",
    )
    ax.set_xlabel("top confidence")
    ax.set_ylabel("count")
    ax.set_xlim(0, 1)
    ax.set_title(title)
    ax.legend()
    return fig


def plot_confusion(row_classes, matrix, title: str):
    fig, ax = plt.subplots(figsize=(max(5, 0.45 * len(row_classes)),) * 2)
    im = ax.imshow(matrix, cmap="Reds")
    ax.set_xticks(range(len(row_classes)))
    ax.set_xticklabels(row_classes, rotation=90, fontsize=7)
    ax.set_yticks(range(len(row_classes)))
    ax.set_yticklabels(row_classes, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("label")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, fraction=0.046)
    return fig


def plot_threshold_sweep(points, title: str):
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = [p.threshold for p in points]
    ax.plot(xs, [p.accuracy for p in points], marker="o", label="accuracy")
    totals = [max(1, sum(p.outcome_counts.values())) for p in points]
    for outcome, style in (
        ("IncorrectAndPredicted", "--"),
        ("IncorrectAndRejected", ":"),
    ):
        ax.plot(
            xs,
            [p.outcome_counts.get(outcome, 0) / t for p, t in zip(points, totals)],
            style,
            label=outcome,
        )
    ax.set_xlabel("prediction threshold")
    ax.set_ylabel("fraction of population")
    ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.legend()
    return fig


def plot_word_importance(correct, incorrect, title: str):
    fig, axes = plt.subplots(1, 2, figsize=(10, max(3, 0.3 * max(len(correct), len(incorrect), 1))))
    for ax, words, color, label in (
        (axes[0], correct, "#2e7d32", "correct"),
        (axes[1], incorrect, "#c62828", "incorrect"),
    ):
        names = [w.word for w in reversed(words)]
        weights = [w.weight for w in reversed(words)]
        ax.barh(range(len(names)), weights, color=color)
        ax.set_yticks(range(len(names)))
        ax.set_yticklabels(names, fontsize=8)
        ax.set_title(f"{label} predictions")
        ax.set_xlabel("summed saliency")
    fig.suptitle(title)
    fig.tight_layout()
    return fig


def plot_class_sizes(split_sizes: dict[str, dict[str, int]]):
    classes = sorted({c for counts in split_sizes.values() for c in counts})
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(classes)), 4))
    width = 0.8 / max(1, len(split_sizes))
    for i, (split, counts) in enumerate(sorted(split_sizes.items())):
        xs = [j + i * width for j in range(len(classes))]
        ax.bar(xs, [counts.get(c, 0) for c in classes], width=width, label=split)
    ax.set_xticks([j + 0.4 for j in range(len(classes))])
    ax.set_xticklabels(classes, rotation=90, fontsize=7)
    ax.set_ylabel("examples")
    ax.set_title("class sizes per split")
    ax.legend()
    return fig


def generate_report(
    engine: AnalysisEngine,
    out_dir: str | Path,
    splits: list[str] | None = None,
    top_n_words: int = 25,
) -> list[Path]:
    """Write every figure and CSV; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    state = engine.state
    splits = splits or sorted(state.splits)

    # dataset-level outputs
    warnings = engine.dataset_warnings()
    _write_csv(
        out / "warnings.csv",
        ["kind", "severity", "class", "split", "evidence"],
        [
            [
                w.kind.value,
                w.severity,
                w.class_name or "",
                w.split or "",
                ";".join(f"{k}={v:g}" for k, v in sorted(w.evidence.items())),
            ]
            for w in warnings
        ],
        written,
    )
    sizes = {
        name: dict(
            zip(*np.unique([u.label for u in state.splits[name].utterances], return_counts=True))
        )
        for name in splits
    }
    sizes = {
        name: {str(c): int(n) for c, n in counts.items()} for name, counts in sizes.items()
    }
    _save(plot_class_sizes(sizes), out / "class_sizes.png", written)

    metric_rows = []
    per_class_rows = []
    behavioral_rows = []
    for split in splits:
        for pipeline in engine.config.pipelines:
            if (pipeline.id, split) not in state.predictions:
                continue
            suffix = f"{split}_{pipeline.id}"
            for stage, postprocessed in (("postprocessed", True), ("raw", False)):
                spec = FilterSpec(pipeline_id=pipeline.id, postprocessed=postprocessed)
                report = engine.metrics(split, spec)
                metric_rows.append(
                    [
                        split,
                        pipeline.id,
                        stage,
                        report.total,
                        f"{report.accuracy:.6f}",
                        f"{report.macro_f1:.6f}",
                        f"{report.ece:.6f}",
                    ]
                    + [report.outcome_counts[o.value] for o in OUTCOME_ORDER]
                )
                for class_name, m in report.per_class.items():
                    per_class_rows.append(
                        [
                            split,
                            pipeline.id,
                            stage,
                            class_name,
                            f"{m.precision:.6f}",
                            f"{m.recall:.6f}",
                            f"{m.f1:.6f}",
                        ]
                    )

            spec = FilterSpec(pipeline_id=pipeline.id)
            hist = engine.confidence_histogram(split, spec)
            _save(
                plot_confidence_histogram(hist, f"confidence ({suffix})"),
                out / f"confidence_histogram_{suffix}.png",
                written,
            )
            row_classes, _, matrix = engine.confusion_matrix(split, spec, normalized=True)
            _save(
                plot_confusion(row_classes, matrix, f"confusion ({suffix})"),
                out / f"confusion_matrix_{suffix}.png",
                written,
            )
            points = engine.threshold_comparison(pipeline.id, split)
            _save(
                plot_threshold_sweep(points, f"threshold sweep ({suffix})"),
                out / f"threshold_sweep_{suffix}.png",
                written,
            )
            try:
                correct, incorrect = engine.top_words(split, spec, top_n_words)
            except MissingSaliency:
                pass
            else:
                _save(
                    plot_word_importance(correct, incorrect, f"word importance ({suffix})"),
                    out / f"top_words_{suffix}.png",
                    written,
                )
            summary = engine.behavioral_summary(split, pipeline.id)
            if summary.available:
                for family, stats in sorted(summary.families.items()):
                    behavioral_rows.append(
                        [
                            split,
                            pipeline.id,
                            family,
                            stats["failed"],
                            stats["total"],
                            f"{stats['rate']:.4f}",
                        ]
                    )

    _write_csv(
        out / "metrics.csv",
        ["split", "pipeline", "stage", "total", "accuracy", "macro_f1", "ece"]
        + [o.value for o in OUTCOME_ORDER],
        metric_rows,
        written,
    )
    _write_csv(
        out / "per_class_metrics.csv",
        ["split", "pipeline", "stage", "class", "precision", "recall", "f1"],
        per_class_rows,
        written,
    )
    if behavioral_rows:
        _write_csv(
            out / "behavioral_summary.csv",
            ["split", "pipeline", "family", "failed", "total", "rate"],
            behavioral_rows,
            written,
        )
    return written
