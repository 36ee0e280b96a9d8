"""One-shot export of every engine ingestion artifact for a dataset and
pipeline: splits, prediction tables, perturbed-text predictions keyed by
(id, test_name), sentence embeddings, token saliency, syntax flags, MC
sample tables, a ready-to-serve engine config, and a manifest with row
counts and checksums.

Formats follow the engine's documented contracts exactly; probabilities
are rounded through float32 the way a real exporter would serialize them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .annotations import hashed_embedding, syntax_flags
from .perturbations import generate_variants

DEFAULT_MC_SAMPLES = 20
DEFAULT_TYPO_VARIANTS = 3


@dataclass
class ExportManifest:
    dataset_name: str
    pipeline_id: str
    seed: int
    mc_samples: int
    files: dict[str, dict] = field(default_factory=dict)

    def record(self, role: str, path: Path, rows: int) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.files[role] = {"path": path.name, "rows": rows, "sha256": digest}

    def to_dict(self) -> dict:
        return {
            "dataset_name": self.dataset_name,
            "pipeline_id": self.pipeline_id,
            "seed": self.seed,
            "mc_samples": self.mc_samples,
            "files": self.files,
        }


def _write_jsonl(path: Path, records) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count


def _write_matrix(path: Path, array: np.ndarray) -> None:
    array = np.asarray(array)
    if array.ndim == 2:
        header = f"{array.shape[0]} {array.shape[1]}\n"
    else:
        header = f"{array.shape[0]} {array.shape[2]} {array.shape[1]}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(array.astype("<f4").tobytes())


def _round_probs(row: np.ndarray) -> list[float]:
    return [float(np.float32(v)) for v in row]


def load_dataset_dir(directory: str | Path) -> dict[str, list[dict]]:
    """Read every ``<split>.jsonl`` file of dataset line records."""
    directory = Path(directory)
    splits = {}
    for path in sorted(directory.glob("*.jsonl")):
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rows.append(json.loads(line))
        splits[path.stem] = rows
    if not splits:
        raise FileNotFoundError(f"{directory}: no *.jsonl split files found")
    return splits


def export_all(
    dataset: dict[str, list[dict]],
    pipeline,
    out_dir: str | Path,
    seed: int,
    dataset_name: str = "dataset",
    pipeline_id: str = "main",
    mc_samples: int = DEFAULT_MC_SAMPLES,
    n_typo_variants: int = DEFAULT_TYPO_VARIANTS,
    prediction_threshold: float = 0.5,
    rejection_class: str = "oos",
) -> ExportManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    class_names = list(pipeline.class_names)
    if rejection_class in class_names:
        raise ValueError(f"rejection class {rejection_class!r} collides with a model class")
    manifest = ExportManifest(dataset_name, pipeline_id, seed, mc_samples)

    config: dict = {
        "project_name": dataset_name,
        "classes": class_names,
        "rejection_class": rejection_class,
        "seed": seed,
        "splits": {},
        "pipelines": [
            {
                "id": pipeline_id,
                "prediction_threshold": prediction_threshold,
                "predictions": {},
                "perturbed_predictions": {},
            }
        ],
        "artifacts": {"embeddings": {}, "syntax": {}, "saliency": {pipeline_id: {}}, "mc_samples": {pipeline_id: {}}},
    }

    for split_name, rows in dataset.items():
        texts = [str(r["text"]) for r in rows]
        labels = [str(r["label"]) for r in rows]
        for label in labels:
            if label not in class_names and label != rejection_class:
                raise ValueError(
                    f"{split_name}: label {label!r} is neither a model class nor the rejection class"
                )

        split_path = out / f"{split_name}.jsonl"
        _write_jsonl(
            split_path,
            ({"id": i, "text": t, "label": l} for i, (t, l) in enumerate(zip(texts, labels))),
        )
        manifest.record(f"split:{split_name}", split_path, len(texts))
        config["splits"][split_name] = split_path.name

        probs = np.asarray(pipeline.predict_proba(texts), dtype=np.float64)
        pred_path = out / f"predictions_{split_name}.jsonl"
        _write_jsonl(
            pred_path,
            ({"id": i, "probs": _round_probs(probs[i])} for i in range(len(texts))),
        )
        manifest.record(f"predictions:{split_name}", pred_path, len(texts))
        config["pipelines"][0]["predictions"][split_name] = pred_path.name

        # perturbed predictions, regenerated under the shared PRNG contract
        variants = []
        for i, text in enumerate(texts):
            variants.extend(generate_variants(text, i, seed, n_typo_variants))
        perturbed_probs = (
            np.asarray(pipeline.predict_proba([v.perturbed_text for v in variants]))
            if variants
            else np.zeros((0, len(class_names)))
        )
        perturbed_path = out / f"perturbed_{split_name}.jsonl"
        _write_jsonl(
            perturbed_path,
            (
                {
                    "id": v.id,
                    "test_name": v.test_name,
                    "probs": _round_probs(perturbed_probs[j]),
                }
                for j, v in enumerate(variants)
            ),
        )
        manifest.record(f"perturbed_predictions:{split_name}", perturbed_path, len(variants))
        config["pipelines"][0]["perturbed_predictions"][split_name] = perturbed_path.name

        if hasattr(pipeline, "embed"):
            embeddings = np.asarray(pipeline.embed(texts), dtype=np.float64)
        else:
            embeddings = hashed_embedding(texts)
        emb_path = out / f"embeddings_{split_name}.bin"
        _write_matrix(emb_path, embeddings)
        manifest.record(f"embeddings:{split_name}", emb_path, len(texts))
        config["artifacts"]["embeddings"][split_name] = emb_path.name

        if hasattr(pipeline, "syntax_flags"):
            flags = pipeline.syntax_flags(texts)
        else:
            flags = syntax_flags(texts)
        syntax_path = out / f"syntax_{split_name}.jsonl"
        _write_jsonl(
            syntax_path,
            (
                {
                    "id": i,
                    "has_subject": bool(s),
                    "has_verb": bool(v),
                    "has_object": bool(o),
                }
                for i, (s, v, o) in enumerate(flags)
            ),
        )
        manifest.record(f"syntax:{split_name}", syntax_path, len(texts))
        config["artifacts"]["syntax"][split_name] = syntax_path.name

        if hasattr(pipeline, "token_saliency"):
            saliency = pipeline.token_saliency(texts)
            saliency_path = out / f"saliency_{split_name}.jsonl"
            _write_jsonl(
                saliency_path,
                (
                    {
                        "id": i,
                        "tokens": list(tokens),
                        "scores": _normalized_scores(scores),
                    }
                    for i, (tokens, scores) in enumerate(saliency)
                ),
            )
            manifest.record(f"saliency:{split_name}", saliency_path, len(texts))
            config["artifacts"]["saliency"][pipeline_id][split_name] = saliency_path.name

        if hasattr(pipeline, "predict_proba_stochastic"):
            stochastic = np.asarray(pipeline.predict_proba_stochastic(texts, mc_samples))
        else:
            stochastic = np.repeat(probs[:, None, :], mc_samples, axis=1)
        stochastic = stochastic / stochastic.sum(axis=2, keepdims=True)
        mc_path = out / f"mc_{split_name}.bin"
        _write_matrix(mc_path, stochastic)
        manifest.record(f"mc_samples:{split_name}", mc_path, len(texts))
        config["artifacts"]["mc_samples"][pipeline_id][split_name] = mc_path.name

    if not config["artifacts"]["saliency"][pipeline_id]:
        del config["artifacts"]["saliency"]

    config_path = out / "config.yaml"
    with open(config_path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config, fh, sort_keys=False)
    manifest.record("config", config_path, 1)

    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2)
        fh.write("\n")
    return manifest


def _normalized_scores(scores) -> list[float]:
    values = [max(0.0, float(s)) for s in scores]
    total = sum(values)
    if total > 0:
        values = [v / total for v in values]
    elif values:
        values = [1.0 / len(values)] * len(values)  # degenerate all-zero map
    return [float(np.float32(v)) for v in values]
