"""Shared fixture builders: write a toy project to disk and load it."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pytest
import yaml

from errorscope.config import ProjectConfig, load_config
from errorscope.engine import AnalysisEngine
from errorscope.formats import write_jsonl, write_matrix
from errorscope.ingestion import ProjectState, load_artifacts
from errorscope.scheduler import AnalysisScheduler


def probs_for(target: int, confidence: float, n_classes: int) -> list[float]:
    """Probability vector with the target class at the given confidence and
    the remainder spread uniformly."""
    rest = (1.0 - confidence) / (n_classes - 1) if n_classes > 1 else 0.0
    vector = [rest] * n_classes
    vector[target] = confidence
    return vector


@dataclass
class ProjectBuilder:
    root: Path
    classes: list[str] = field(default_factory=lambda: ["greeting", "weather", "distance", "travel_alert"])
    rejection_class: str = "oos"
    seed: int = 42
    prediction_threshold: float = 0.5
    thresholds: dict = field(default_factory=dict)
    datasets: dict = field(default_factory=dict)  # split -> list[(text, label)]
    predictions: dict = field(default_factory=dict)  # pipeline -> split -> list[list[float]]
    perturbed: dict = field(default_factory=dict)  # pipeline -> split -> list[dict]
    embeddings: dict = field(default_factory=dict)  # split -> 2-D array
    syntax: dict = field(default_factory=dict)  # split -> list[dict]
    saliency: dict = field(default_factory=dict)  # pipeline -> split -> list[dict]
    mc_samples: dict = field(default_factory=dict)  # pipeline -> split -> 3-D array
    provider_urls: dict = field(default_factory=dict)  # pipeline -> url
    pipeline_thresholds: dict = field(default_factory=dict)  # pipeline -> threshold

    def write(self) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        config: dict = {
            "project_name": "toy",
            "classes": self.classes,
            "rejection_class": self.rejection_class,
            "seed": self.seed,
            "prediction_threshold": self.prediction_threshold,
            "splits": {},
            "pipelines": [],
            "artifacts": {},
        }
        if self.thresholds:
            config["thresholds"] = self.thresholds

        for split, rows in self.datasets.items():
            path = self.root / f"{split}.jsonl"
            write_jsonl(
                path,
                [
                    {"id": i, "text": text, "label": label}
                    for i, (text, label) in enumerate(rows)
                ],
            )
            config["splits"][split] = path.name

        pipeline_ids = set(self.predictions) | set(self.provider_urls)
        for pid in sorted(pipeline_ids):
            entry: dict = {"id": pid}
            if pid in self.pipeline_thresholds:
                entry["prediction_threshold"] = self.pipeline_thresholds[pid]
            preds = self.predictions.get(pid, {})
            if preds:
                entry["predictions"] = {}
                for split, table in preds.items():
                    path = self.root / f"preds_{pid}_{split}.jsonl"
                    write_jsonl(
                        path,
                        [{"id": i, "probs": list(map(float, row))} for i, row in enumerate(table)],
                    )
                    entry["predictions"][split] = path.name
            perturbed = self.perturbed.get(pid, {})
            if perturbed:
                entry["perturbed_predictions"] = {}
                for split, rows in perturbed.items():
                    path = self.root / f"perturbed_{pid}_{split}.jsonl"
                    write_jsonl(path, rows)
                    entry["perturbed_predictions"][split] = path.name
            if pid in self.provider_urls:
                entry["provider_url"] = self.provider_urls[pid]
            config["pipelines"].append(entry)

        if self.embeddings:
            config["artifacts"]["embeddings"] = {}
            for split, matrix in self.embeddings.items():
                path = self.root / f"emb_{split}.bin"
                write_matrix(path, np.asarray(matrix, dtype=np.float64))
                config["artifacts"]["embeddings"][split] = path.name
        if self.syntax:
            config["artifacts"]["syntax"] = {}
            for split, rows in self.syntax.items():
                path = self.root / f"syntax_{split}.jsonl"
                write_jsonl(path, rows)
                config["artifacts"]["syntax"][split] = path.name
        if self.saliency:
            config["artifacts"]["saliency"] = {}
            for pid, by_split in self.saliency.items():
                config["artifacts"]["saliency"][pid] = {}
                for split, rows in by_split.items():
                    path = self.root / f"saliency_{pid}_{split}.jsonl"
                    write_jsonl(path, rows)
                    config["artifacts"]["saliency"][pid][split] = path.name
        if self.mc_samples:
            config["artifacts"]["mc_samples"] = {}
            for pid, by_split in self.mc_samples.items():
                config["artifacts"]["mc_samples"][pid] = {}
                for split, table in by_split.items():
                    path = self.root / f"mc_{pid}_{split}.bin"
                    write_matrix(path, np.asarray(table, dtype=np.float64))
                    config["artifacts"]["mc_samples"][pid][split] = path.name

        config_path = self.root / "config.yaml"
        with open(config_path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(config, fh, sort_keys=False)
        return config_path

    def load_config(self) -> ProjectConfig:
        return load_config(self.write())

    def load(self) -> ProjectState:
        return load_artifacts(self.load_config())

    def engine(self, cache_dir: Path | None = None) -> AnalysisEngine:
        state = self.load()
        scheduler = AnalysisScheduler(cache_dir)
        return AnalysisEngine(state, scheduler)


@pytest.fixture
def builder(tmp_path) -> ProjectBuilder:
    return ProjectBuilder(root=tmp_path / "project")


def minimal_datasets() -> dict:
    """Small train/eval pair covering all four classes plus the rejection
    label in eval."""
    train = [
        ("hello there friend", "greeting"),
        ("good morning to you", "greeting"),
        ("what is the weather today", "weather"),
        ("will it rain tomorrow in denver", "weather"),
        ("how far away is the airport", "distance"),
        ("what is the distance to boston", "distance"),
        ("any travel alerts for france", "travel_alert"),
        ("are there travel warnings for spain", "travel_alert"),
    ]
    eval_rows = [
        ("hi there", "greeting"),
        ("what's today's high and low", "weather"),
        ("how long to drive to the coast", "distance"),
        ("is it safe to travel to peru", "travel_alert"),
        ("tell me a bedtime story", "oos"),
    ]
    return {"train": train, "eval": eval_rows}


@pytest.fixture
def small_project(builder) -> ProjectBuilder:
    """Toy project with one pipeline, crafted probabilities, and no
    optional artifacts."""
    datasets = minimal_datasets()
    builder.datasets = datasets
    c = builder.classes
    train_targets = [c.index(label) for _, label in datasets["train"]]
    builder.predictions = {
        "main": {
            "train": [probs_for(t, 0.9, len(c)) for t in train_targets],
            "eval": [
                probs_for(0, 0.85, len(c)),  # greeting correct, confident
                probs_for(3, 0.41, len(c)),  # weather predicted travel_alert, rejected
                probs_for(2, 0.75, len(c)),  # distance correct
                probs_for(1, 0.55, len(c)),  # travel_alert predicted weather
                probs_for(0, 0.30, len(c)),  # oos rejected (correct)
            ],
        }
    }
    return builder
