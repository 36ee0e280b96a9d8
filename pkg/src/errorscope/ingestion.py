"""Load all file-backed artifacts for a project into an immutable state.

Loading is single-threaded and strict about structure (row counts, id
order, declared labels); numeric plausibility checks (probability sums,
NaN scans, saliency normalization) live in ``validate_artifacts`` and
produce report entries instead of exceptions.  The resulting ProjectState
is never mutated, so concurrent readers need no synchronization.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .config import ProjectConfig
from .errors import MalformedRow, ProviderUnavailable
from .formats import (
    SaliencyRow,
    SyntaxRow,
    read_dataset,
    read_matrix,
    read_perturbed_predictions,
    read_predictions,
    read_saliency,
    read_syntax,
)

PROBABILITY_SUM_TOLERANCE = 1e-4


@dataclass(frozen=True)
class Utterance:
    id: int
    text: str
    label: str
    split: str


@dataclass
class DatasetSplit:
    name: str
    utterances: list[Utterance]

    def __len__(self) -> int:
        return len(self.utterances)

    @property
    def texts(self) -> list[str]:
        return [u.text for u in self.utterances]

    @property
    def labels(self) -> list[str]:
        return [u.label for u in self.utterances]


@dataclass
class ProjectState:
    config: ProjectConfig
    splits: dict[str, DatasetSplit]
    # (pipeline_id, split) -> (N, C) class probabilities
    predictions: dict[tuple[str, str], np.ndarray]
    # split -> (N, D) embeddings, L2-normalized at load
    embeddings: dict[str, np.ndarray] = field(default_factory=dict)
    syntax: dict[str, list[SyntaxRow]] = field(default_factory=dict)
    saliency: dict[tuple[str, str], list[SaliencyRow]] = field(default_factory=dict)
    # (pipeline_id, split) -> (N, M, C) stochastic probability samples
    mc_samples: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)
    # (pipeline_id, split) -> {(id, test_name): (C,) probabilities}
    perturbed: dict[tuple[str, str], dict[tuple[int, str], np.ndarray]] = field(
        default_factory=dict
    )

    @property
    def split_names(self) -> list[str]:
        return list(self.splits.keys())

    def split(self, name: str) -> DatasetSplit:
        return self.splits[name]


@dataclass(frozen=True)
class ValidationIssue:
    file: str
    check: str
    utterance_id: int | None
    message: str


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, file: str, check: str, utterance_id: int | None, message: str) -> None:
        self.issues.append(ValidationIssue(file, check, utterance_id, message))


def _normalize_embeddings(matrix: np.ndarray) -> np.ndarray:
    """L2-normalize rows so cosine similarity reduces to a dot product.
    Zero rows are kept as zeros and rejected later at query time."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return matrix / safe


def _fetch_remote_predictions(url: str, texts: list[str], n_classes: int) -> np.ndarray:
    """Fetch base prediction vectors for a split from a remote provider."""
    from .behavioral import post_texts_to_provider

    try:
        vectors = post_texts_to_provider(url, texts)
    except ProviderUnavailable:
        raise
    out = np.asarray(vectors, dtype=np.float64)
    if out.shape != (len(texts), n_classes):
        raise MalformedRow(
            f"provider {url}: expected {len(texts)}x{n_classes} probabilities, got {out.shape}"
        )
    return out


def load_artifacts(config: ProjectConfig) -> ProjectState:
    """Load every split, prediction table, and present optional artifact."""
    declared = config.declared_labels
    splits: dict[str, DatasetSplit] = {}
    for name, path in config.splits.items():
        utterances = []
        for row in read_dataset(path):
            if row["label"] not in declared:
                raise MalformedRow(
                    f"{path}: id {row['id']}: label {row['label']!r} is not a declared class"
                )
            utterances.append(Utterance(row["id"], row["text"], row["label"], name))
        splits[name] = DatasetSplit(name, utterances)

    predictions: dict[tuple[str, str], np.ndarray] = {}
    perturbed: dict[tuple[str, str], dict[tuple[int, str], np.ndarray]] = {}
    for pipeline in config.pipelines:
        for split_name, split in splits.items():
            if split_name in pipeline.predictions:
                table = read_predictions(
                    pipeline.predictions[split_name], len(split), config.class_count
                )
            elif pipeline.provider_url:
                table = _fetch_remote_predictions(
                    pipeline.provider_url, split.texts, config.class_count
                )
            else:
                continue
            predictions[(pipeline.id, split_name)] = table
        for split_name, path in pipeline.perturbed_predictions.items():
            perturbed[(pipeline.id, split_name)] = read_perturbed_predictions(
                path, config.class_count
            )

    embeddings = {}
    dim = None
    for split_name, path in config.embeddings.items():
        matrix = read_matrix(path, len(splits[split_name]))
        if dim is None:
            dim = matrix.shape[1]
        elif matrix.shape[1] != dim:
            raise MalformedRow(
                f"{path}: embedding dim {matrix.shape[1]} differs from other splits ({dim})"
            )
        embeddings[split_name] = _normalize_embeddings(matrix)

    syntax = {
        split_name: read_syntax(path, len(splits[split_name]))
        for split_name, path in config.syntax.items()
    }
    saliency = {
        (pid, split_name): read_saliency(path, len(splits[split_name]))
        for pid, by_split in config.saliency.items()
        for split_name, path in by_split.items()
    }
    mc_samples = {
        (pid, split_name): read_matrix(path, len(splits[split_name]), with_samples=True)
        for pid, by_split in config.mc_samples.items()
        for split_name, path in by_split.items()
    }
    for key, table in mc_samples.items():
        if table.shape[2] != config.class_count:
            raise MalformedRow(
                f"mc_samples {key}: class dim {table.shape[2]} != {config.class_count}"
            )
        if table.shape[1] < 2:
            raise MalformedRow(f"mc_samples {key}: needs at least 2 samples per row")

    return ProjectState(
        config=config,
        splits=splits,
        predictions=predictions,
        embeddings=embeddings,
        syntax=syntax,
        saliency=saliency,
        mc_samples=mc_samples,
        perturbed=perturbed,
    )


def validate_artifacts(state: ProjectState) -> ValidationReport:
    """Numeric plausibility checks over a loaded state.

    Failures become report entries, never exceptions; report.ok is true
    iff there are zero entries.
    """
    report = ValidationReport()
    config = state.config

    for (pid, split_name), table in state.predictions.items():
        file = config.pipeline(pid).predictions.get(split_name, f"provider:{pid}")
        _check_probability_table(report, file, table)

    for split_name, matrix in state.embeddings.items():
        file = config.embeddings[split_name]
        bad = ~np.isfinite(matrix)
        if bad.any():
            for rid in np.unique(np.nonzero(bad)[0]):
                report.add(file, "embedding_finite", int(rid), "embedding contains NaN or Inf")
        if matrix.shape[1] < 2:
            report.add(file, "embedding_dim", None, f"dimension {matrix.shape[1]} < 2")

    for (pid, split_name), rows in state.saliency.items():
        file = config.saliency[pid][split_name]
        for row in rows:
            if not row.scores:
                continue
            total = float(sum(row.scores))
            if abs(total - 1.0) > PROBABILITY_SUM_TOLERANCE:
                report.add(
                    file,
                    "saliency_normalized",
                    row.id,
                    f"saliency sums to {total:.6f}, expected 1 within {PROBABILITY_SUM_TOLERANCE}",
                )

    for (pid, split_name), table in state.mc_samples.items():
        file = config.mc_samples[pid][split_name]
        flat = table.reshape(-1, table.shape[2])
        sums = flat.sum(axis=1)
        bad = np.abs(sums - 1.0) > PROBABILITY_SUM_TOLERANCE
        for idx in np.nonzero(bad)[0]:
            report.add(
                file,
                "probability_sum",
                int(idx // table.shape[1]),
                f"sample probability sum {sums[idx]:.6f} out of tolerance",
            )

    for (pid, split_name), table in state.perturbed.items():
        file = config.pipeline(pid).perturbed_predictions[split_name]
        n = len(state.splits[split_name])
        for (rid, test_name), probs in table.items():
            if rid < 0 or rid >= n:
                report.add(file, "utterance_exists", rid, f"unknown utterance id {rid}")
                continue
            total = float(probs.sum())
            if abs(total - 1.0) > PROBABILITY_SUM_TOLERANCE:
                report.add(
                    file,
                    "probability_sum",
                    rid,
                    f"({rid}, {test_name}): probability sum {total:.6f} out of tolerance",
                )
    return report


def _check_probability_table(report: ValidationReport, file: str, table: np.ndarray) -> None:
    sums = table.sum(axis=1)
    bad_sum = np.abs(sums - 1.0) > PROBABILITY_SUM_TOLERANCE
    for rid in np.nonzero(bad_sum)[0]:
        report.add(
            file,
            "probability_sum",
            int(rid),
            f"probability sum {sums[rid]:.6f} out of tolerance {PROBABILITY_SUM_TOLERANCE}",
        )
    out_of_range = (table < 0) | (table > 1)
    for rid in np.unique(np.nonzero(out_of_range)[0]):
        report.add(file, "probability_range", int(rid), "probability outside [0, 1]")


def state_fingerprint(state: ProjectState) -> str:
    """Canonical digest of a loaded state; two loads of identical files
    produce identical fingerprints."""
    h = hashlib.sha256()
    h.update(state.config.config_hash.encode())
    for name in sorted(state.splits):
        for u in state.splits[name].utterances:
            h.update(f"{name}\x1f{u.id}\x1f{u.label}\x1f{u.text}\x1e".encode("utf-8"))
    for key in sorted(state.predictions):
        h.update(repr(key).encode())
        h.update(np.ascontiguousarray(state.predictions[key]).tobytes())
    for name in sorted(state.embeddings):
        h.update(name.encode())
        h.update(np.ascontiguousarray(state.embeddings[name]).tobytes())
    for name in sorted(state.syntax):
        h.update(name.encode())
        h.update(repr(state.syntax[name]).encode())
    for key in sorted(state.saliency):
        h.update(repr(key).encode())
        h.update(repr(state.saliency[key]).encode())
    for key in sorted(state.mc_samples):
        h.update(repr(key).encode())
        h.update(np.ascontiguousarray(state.mc_samples[key]).tobytes())
    for key in sorted(state.perturbed):
        h.update(repr(key).encode())
        for vkey in sorted(state.perturbed[key]):
            h.update(repr(vkey).encode())
            h.update(np.ascontiguousarray(state.perturbed[key][vkey]).tobytes())
    return h.hexdigest()
