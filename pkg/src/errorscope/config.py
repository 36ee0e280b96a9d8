"""Project configuration: schema, defaults, validation, and cache hashing.

The config file is YAML with stable key names.  Relative file paths are
resolved against the directory containing the config file.  Every tunable
has a documented default so a minimal config only names the project, the
class list, the rejection class, the splits, and the pipelines.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError, InvalidThreshold, MissingField, UnknownSplitName
from .stopwords import DEFAULT_STOPWORDS

DEFAULT_SEED = 42
DEFAULT_PREDICTION_THRESHOLD = 0.5


@dataclass(frozen=True)
class Thresholds:
    """All engine tunables, with their documented defaults."""

    min_per_class: int = 20
    proportion_delta: float = 0.05
    mean_delta_tokens: float = 3.0
    std_delta_tokens: float = 3.0
    short_sentence_tokens: int = 3
    long_sentence_tokens: int = 15
    tau_close: float = 0.5
    knn_k: int = 20
    tau_same: float = 0.1
    tau_epistemic: float = 0.2
    conf_delta_max: float = 1.0
    n_typo_variants: int = 3
    ece_bins: int = 10
    histogram_bins: int = 20


@dataclass(frozen=True)
class PipelineSource:
    """One model pipeline: file-backed prediction tables and/or a remote
    provider endpoint for texts the tables do not cover."""

    id: str
    prediction_threshold: float
    predictions: dict[str, str] = field(default_factory=dict)
    perturbed_predictions: dict[str, str] = field(default_factory=dict)
    provider_url: str | None = None


@dataclass(frozen=True)
class ProjectConfig:
    project_name: str
    classes: tuple[str, ...]
    rejection_class: str
    seed: int
    splits: dict[str, str]
    pipelines: tuple[PipelineSource, ...]
    embeddings: dict[str, str]
    syntax: dict[str, str]
    saliency: dict[str, dict[str, str]]
    mc_samples: dict[str, dict[str, str]]
    thresholds: Thresholds
    stopwords: frozenset[str]
    action_store_path: str
    cache_dir: str
    config_hash: str

    @property
    def class_count(self) -> int:
        return len(self.classes)

    @property
    def declared_labels(self) -> frozenset[str]:
        """Valid utterance labels: the class list plus the rejection class."""
        return frozenset(self.classes) | {self.rejection_class}

    def pipeline(self, pipeline_id: str) -> PipelineSource:
        for p in self.pipelines:
            if p.id == pipeline_id:
                return p
        raise KeyError(pipeline_id)

    @property
    def pipeline_ids(self) -> list[str]:
        return [p.id for p in self.pipelines]

    def tunables_digest(self, names: list[str], pipeline_id: str | None = None) -> str:
        """64-bit hex digest over the named tunables (plus seed, class list,
        and the pipeline threshold when a pipeline is given).

        Modules key their cache entries on the digest of exactly the
        tunables they read, so unrelated config edits do not invalidate
        their results.
        """
        payload: dict[str, object] = {
            "seed": self.seed,
            "classes": list(self.classes),
            "rejection_class": self.rejection_class,
        }
        for name in sorted(names):
            if name == "stopwords":
                payload[name] = sorted(self.stopwords)
            else:
                payload[name] = getattr(self.thresholds, name)
        if pipeline_id is not None:
            payload["pipeline"] = pipeline_id
            payload["prediction_threshold"] = self.pipeline(pipeline_id).prediction_threshold
        return _digest64(payload)


def _digest64(payload: object) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _require(mapping: dict, key: str, path: str):
    if key not in mapping or mapping[key] is None:
        raise MissingField(f"missing required field: {path}{key}")
    return mapping[key]


def _check_threshold(value, path: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidThreshold(f"{path}: threshold must be a number, got {value!r}")
    if not 0.0 <= value <= 1.0:
        raise InvalidThreshold(f"{path}: threshold {value} outside [0, 1]")
    return value


def _check_split_names(mapping: dict, declared: set[str], path: str) -> None:
    for name in mapping:
        if name not in declared:
            raise UnknownSplitName(f"{path}{name}: split not declared under 'splits'")


def _resolve_paths(mapping: dict, base: Path) -> dict[str, str]:
    return {k: str((base / v).resolve()) for k, v in mapping.items()}


def load_config(path: str | Path) -> ProjectConfig:
    """Load and validate a project config file.

    Raises MissingField, InvalidThreshold, or UnknownSplitName with the
    offending field path in the message; any of these should abort startup.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise MissingField(f"{path}: config must be a mapping")
    base = path.parent

    project_name = str(_require(raw, "project_name", ""))
    classes = tuple(str(c) for c in _require(raw, "classes", ""))
    if not classes:
        raise MissingField("classes: must list at least one class")
    rejection_class = str(_require(raw, "rejection_class", ""))
    if rejection_class in classes:
        raise ConfigError(
            f"rejection_class {rejection_class!r} must not be among the scored classes; "
            "it exists only through thresholding and labels"
        )

    seed = raw.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise MissingField(f"seed: must be an unsigned 64-bit integer, got {seed!r}")

    splits_raw = _require(raw, "splits", "")
    if "train" not in splits_raw:
        raise MissingField("splits.train: a split named 'train' is required")
    if "eval" not in splits_raw:
        raise MissingField("splits.eval: a split named 'eval' is required")
    split_names = set(splits_raw)
    splits_rel = {k: str(v) for k, v in splits_raw.items()}
    splits = _resolve_paths(splits_rel, base)

    default_threshold = _check_threshold(
        raw.get("prediction_threshold", DEFAULT_PREDICTION_THRESHOLD), "prediction_threshold"
    )

    pipelines = []
    pipelines_rel = []
    seen_ids: set[str] = set()
    for i, entry in enumerate(raw.get("pipelines") or []):
        ppath = f"pipelines[{i}]."
        pid = str(_require(entry, "id", ppath))
        if pid in seen_ids:
            raise MissingField(f"{ppath}id: duplicate pipeline id {pid!r}")
        seen_ids.add(pid)
        threshold = _check_threshold(
            entry.get("prediction_threshold", default_threshold), ppath + "prediction_threshold"
        )
        predictions = {k: str(v) for k, v in (entry.get("predictions") or {}).items()}
        _check_split_names(predictions, split_names, ppath + "predictions.")
        perturbed = {k: str(v) for k, v in (entry.get("perturbed_predictions") or {}).items()}
        _check_split_names(perturbed, split_names, ppath + "perturbed_predictions.")
        provider_url = entry.get("provider_url")
        if not predictions and provider_url is None:
            raise MissingField(
                f"{ppath}: pipeline needs prediction files or a provider_url"
            )
        pipelines_rel.append(
            {
                "id": pid,
                "prediction_threshold": threshold,
                "predictions": predictions,
                "perturbed_predictions": perturbed,
                "provider_url": provider_url,
            }
        )
        pipelines.append(
            PipelineSource(
                id=pid,
                prediction_threshold=threshold,
                predictions=_resolve_paths(predictions, base),
                perturbed_predictions=_resolve_paths(perturbed, base),
                provider_url=provider_url,
            )
        )

    artifacts = raw.get("artifacts") or {}
    embeddings_rel = {k: str(v) for k, v in (artifacts.get("embeddings") or {}).items()}
    _check_split_names(embeddings_rel, split_names, "artifacts.embeddings.")
    syntax_rel = {k: str(v) for k, v in (artifacts.get("syntax") or {}).items()}
    _check_split_names(syntax_rel, split_names, "artifacts.syntax.")

    pipeline_ids = {p.id for p in pipelines}
    saliency_rel: dict[str, dict[str, str]] = {}
    for pid, by_split in (artifacts.get("saliency") or {}).items():
        if pid not in pipeline_ids:
            raise MissingField(f"artifacts.saliency.{pid}: unknown pipeline id")
        _check_split_names(by_split, split_names, f"artifacts.saliency.{pid}.")
        saliency_rel[pid] = {k: str(v) for k, v in by_split.items()}
    mc_rel: dict[str, dict[str, str]] = {}
    for pid, by_split in (artifacts.get("mc_samples") or {}).items():
        if pid not in pipeline_ids:
            raise MissingField(f"artifacts.mc_samples.{pid}: unknown pipeline id")
        _check_split_names(by_split, split_names, f"artifacts.mc_samples.{pid}.")
        mc_rel[pid] = {k: str(v) for k, v in by_split.items()}

    thresholds_raw = dict(raw.get("thresholds") or {})
    stopwords = thresholds_raw.pop("stopwords", None)
    known = {f.name for f in fields(Thresholds)}
    unknown = set(thresholds_raw) - known
    if unknown:
        raise MissingField(f"thresholds: unknown keys {sorted(unknown)}")
    thresholds = Thresholds(**thresholds_raw)
    for frac_name in ("proportion_delta", "tau_close", "tau_same"):
        _check_threshold(getattr(thresholds, frac_name), f"thresholds.{frac_name}")
    if thresholds.short_sentence_tokens > thresholds.long_sentence_tokens:
        raise ConfigError(
            "thresholds: short_sentence_tokens must not exceed long_sentence_tokens"
        )

    stopword_set = (
        frozenset(str(w).lower() for w in stopwords)
        if stopwords is not None
        else DEFAULT_STOPWORDS
    )

    action_store_path = str((base / raw.get("action_store", "proposed_actions.jsonl")).resolve())
    cache_dir = str((base / raw.get("cache_dir", "cache")).resolve())

    # Hash over unresolved paths so relocating a project directory keeps
    # its cache valid.
    config_hash = _digest64(
        {
            "project_name": project_name,
            "classes": list(classes),
            "rejection_class": rejection_class,
            "seed": seed,
            "splits": splits_rel,
            "pipelines": pipelines_rel,
            "embeddings": embeddings_rel,
            "syntax": syntax_rel,
            "saliency": saliency_rel,
            "mc_samples": mc_rel,
            "thresholds": {f.name: getattr(thresholds, f.name) for f in fields(Thresholds)},
            "stopwords": sorted(stopword_set),
        }
    )

    return ProjectConfig(
        project_name=project_name,
        classes=classes,
        rejection_class=rejection_class,
        seed=seed,
        splits=splits,
        pipelines=tuple(pipelines),
        embeddings=_resolve_paths(embeddings_rel, base),
        syntax=_resolve_paths(syntax_rel, base),
        saliency={pid: _resolve_paths(m, base) for pid, m in saliency_rel.items()},
        mc_samples={pid: _resolve_paths(m, base) for pid, m in mc_rel.items()},
        thresholds=thresholds,
        stopwords=stopword_set,
        action_store_path=action_store_path,
        cache_dir=cache_dir,
        config_hash=config_hash,
    )
