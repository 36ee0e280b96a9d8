"""Smart-tag registry, subpopulation filtering, and proposed actions.

Tag names form a closed registry grouped into families.  Filtering
combines facets with AND and values within a facet with OR, except smart
tags, where values OR within a family and AND across families.  Proposed
actions are human annotations persisted to an append-compacted JSONL file
in the project directory; they never influence any computed result.
"""

from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    InvalidRange,
    IoError,
    UnknownAction,
    UnknownTagName,
    UnknownUtterance,
)
from .ingestion import DatasetSplit, ProjectState
from .prediction import OUTCOME_ORDER, PredictionView
from .similarity import NeighborList, similarity_tags
from .syntax import syntax_tags
from .uncertainty import confidence_tags, epistemic_score
from . import prediction as prediction_mod

TAG_FAMILIES: dict[str, tuple[str, ...]] = {
    "extreme_length": ("long_sentence", "short_sentence"),
    "partial_syntax": ("missing_subject", "missing_verb", "missing_object"),
    "dissimilar": (
        "no_close_train",
        "no_close_eval",
        "conflicting_neighbors_train",
        "conflicting_neighbors_eval",
    ),
    "behavioral": ("failed_punctuation", "failed_fuzzy_matching"),
    "almost_correct": ("correct_top_3", "correct_low_conf"),
    "uncertain": ("high_epistemic_uncertainty",),
    "pipeline_comparison": ("incorrect_for_all_pipelines", "pipeline_disagreement"),
}

TAG_TO_FAMILY: dict[str, str] = {
    name: family for family, names in TAG_FAMILIES.items() for name in names
}

ALL_TAGS: frozenset[str] = frozenset(TAG_TO_FAMILY)

PROPOSED_ACTIONS = (
    "relabel",
    "remove",
    "augment_with_similar",
    "define_new_class",
    "merge_classes",
    "investigate",
    "no_action",
)
DEFAULT_ACTION = "no_action"

OUTCOME_NAMES = frozenset(o.value for o in OUTCOME_ORDER)

SORT_FIELDS = ("id", "top_confidence", "label", "prediction")


def evaluate_all_tags(
    state: ProjectState,
    split_name: str,
    pipeline_id: str | None,
    neighbor_tables: dict[str, list[NeighborList]] | None = None,
    behavioral_tags: dict[int, frozenset[str]] | None = None,
) -> dict[int, frozenset[str]]:
    """Union of every module's tags for one split and pipeline.

    Modules whose optional artifacts are absent contribute nothing.
    Expensive sub-results (neighbor tables, behavioral test outcomes) are
    injected by the caller so they can be cached independently.
    """
    config = state.config
    thresholds = config.thresholds
    split = state.splits[split_name]
    syntax_rows = state.syntax.get(split_name)

    labels_by_split = {
        name: state.splits[name].labels for name in ("train", "eval") if name in state.splits
    }

    prediction_table = None
    pipeline_threshold = 0.0
    if pipeline_id is not None and (pipeline_id, split_name) in state.predictions:
        prediction_table = state.predictions[(pipeline_id, split_name)]
        pipeline_threshold = config.pipeline(pipeline_id).prediction_threshold

    comparison_tables = {
        p.id: state.predictions[(p.id, split_name)]
        for p in config.pipelines
        if (p.id, split_name) in state.predictions
    }
    comparison_thresholds = {p.id: p.prediction_threshold for p in config.pipelines}

    mc_table = (
        state.mc_samples.get((pipeline_id, split_name)) if pipeline_id is not None else None
    )

    tags: dict[int, frozenset[str]] = {}
    for u in split.utterances:
        collected = set(
            syntax_tags(
                u.text,
                syntax_rows[u.id] if syntax_rows else None,
                thresholds.short_sentence_tokens,
                thresholds.long_sentence_tokens,
            )
        )
        if neighbor_tables:
            per_target = {
                target: table[u.id] for target, table in neighbor_tables.items()
            }
            collected |= similarity_tags(
                per_target, u.label, labels_by_split, thresholds.tau_close, thresholds.tau_same
            )
        if prediction_table is not None:
            raw_post = prediction_mod.postprocess(
                prediction_table[u.id], 0.0, config.rejection_class, config.classes
            )
            thr_post = prediction_mod.postprocess(
                prediction_table[u.id],
                pipeline_threshold,
                config.rejection_class,
                config.classes,
            )
            collected |= confidence_tags(
                u.label, raw_post, thr_post, config.rejection_class
            )
        if mc_table is not None:
            score = epistemic_score(mc_table[u.id])
            if score.bald > thresholds.tau_epistemic:
                collected.add("high_epistemic_uncertainty")
        if len(comparison_tables) >= 2:
            collected |= prediction_mod.pipeline_comparison_tags(
                comparison_tables,
                comparison_thresholds,
                u.id,
                u.label,
                config.rejection_class,
                config.classes,
            )
        if behavioral_tags and u.id in behavioral_tags:
            collected |= behavioral_tags[u.id]
        tags[u.id] = frozenset(collected)
    return tags


@dataclass(frozen=True)
class FilterSpec:
    labels: frozenset[str] = frozenset()
    predictions: frozenset[str] = frozenset()
    outcomes: frozenset[str] = frozenset()
    smart_tags: frozenset[str] = frozenset()
    data_actions: frozenset[str] = frozenset()
    confidence_min: float = 0.0
    confidence_max: float = 1.0
    substring: str = ""
    pipeline_id: str | None = None
    postprocessed: bool = True

    def validate(self) -> None:
        if not (0.0 <= self.confidence_min <= self.confidence_max <= 1.0):
            raise InvalidRange(
                f"confidence range [{self.confidence_min}, {self.confidence_max}] invalid"
            )
        unknown_tags = self.smart_tags - ALL_TAGS
        if unknown_tags:
            raise UnknownTagName(f"unknown smart tags: {sorted(unknown_tags)}")
        unknown_outcomes = self.outcomes - OUTCOME_NAMES
        if unknown_outcomes:
            raise UnknownTagName(f"unknown outcomes: {sorted(unknown_outcomes)}")
        unknown_actions = self.data_actions - set(PROPOSED_ACTIONS)
        if unknown_actions:
            raise UnknownAction(f"unknown proposed actions: {sorted(unknown_actions)}")


@dataclass
class UtteranceRow:
    id: int
    text: str
    label: str
    prediction: str | None
    top_confidence: float | None
    outcome: str | None
    smart_tags: list[str]
    proposed_action: str


class FilterIndex:
    """Columnar view of one split for fast repeated filtering.

    Built once per (split, pipeline, post-processing stage) from the
    cached tag map and action snapshot; every facet test is then a
    vectorized mask over the precomputed columns.
    """

    def __init__(
        self,
        split: DatasetSplit,
        view: PredictionView | None,
        tags: dict[int, frozenset[str]],
        actions: dict[int, str],
    ):
        n = len(split)
        self.split = split
        self.view = view
        self.n = n
        self.labels = np.array([u.label for u in split.utterances], dtype=object)
        self.texts_lower = [u.text.lower() for u in split.utterances]
        self.tag_sets = [tags.get(i, frozenset()) for i in range(n)]
        self.tag_masks = {
            name: np.fromiter(
                (name in self.tag_sets[i] for i in range(n)), dtype=bool, count=n
            )
            for name in ALL_TAGS
        }
        self.actions = np.array(
            [actions.get(i, DEFAULT_ACTION) for i in range(n)], dtype=object
        )
        if view is not None:
            self.predictions = np.array([view.top_class(i) for i in range(n)], dtype=object)
            self.outcomes = np.array([view.outcome(i).value for i in range(n)], dtype=object)
            self.confidence = np.asarray(view.top_confidence, dtype=np.float64)
        else:
            self.predictions = None
            self.outcomes = None
            self.confidence = None

    def mask(self, spec: FilterSpec) -> np.ndarray:
        spec.validate()
        keep = np.ones(self.n, dtype=bool)
        if spec.labels:
            keep &= np.isin(self.labels, list(spec.labels))
        if spec.smart_tags:
            by_family: dict[str, list[str]] = {}
            for name in spec.smart_tags:
                by_family.setdefault(TAG_TO_FAMILY[name], []).append(name)
            for names in by_family.values():
                family_mask = np.zeros(self.n, dtype=bool)
                for name in names:
                    family_mask |= self.tag_masks[name]
                keep &= family_mask
        if spec.data_actions:
            keep &= np.isin(self.actions, list(spec.data_actions))
        if self.predictions is not None:
            if spec.predictions:
                keep &= np.isin(self.predictions, list(spec.predictions))
            if spec.outcomes:
                keep &= np.isin(self.outcomes, list(spec.outcomes))
            keep &= (self.confidence >= spec.confidence_min) & (
                self.confidence <= spec.confidence_max
            )
        elif spec.predictions or spec.outcomes:
            keep[:] = False
        if spec.substring:
            needle = spec.substring.lower()
            for i in np.nonzero(keep)[0]:
                if needle not in self.texts_lower[i]:
                    keep[i] = False
        return keep

    def matching_ids(self, spec: FilterSpec) -> np.ndarray:
        return np.nonzero(self.mask(spec))[0]

    def row(self, i: int) -> UtteranceRow:
        u = self.split.utterances[i]
        return UtteranceRow(
            id=u.id,
            text=u.text,
            label=u.label,
            prediction=str(self.predictions[i]) if self.predictions is not None else None,
            top_confidence=float(self.confidence[i]) if self.confidence is not None else None,
            outcome=str(self.outcomes[i]) if self.outcomes is not None else None,
            smart_tags=sorted(self.tag_sets[i]),
            proposed_action=str(self.actions[i]),
        )


def filter_utterances(
    index: FilterIndex,
    spec: FilterSpec,
    sort_field: str = "id",
    descending: bool = False,
    offset: int = 0,
    limit: int = 50,
) -> tuple[int, list[UtteranceRow]]:
    """Filter, sort, and paginate one split.

    Sorting is stable with an ascending-id tiebreak in both directions;
    total_count ignores pagination.
    """
    if sort_field not in SORT_FIELDS:
        raise InvalidRange(f"sort field must be one of {SORT_FIELDS}, got {sort_field!r}")
    if offset < 0 or limit < 0:
        raise InvalidRange("offset and limit must be non-negative")
    ids = index.matching_ids(spec).tolist()
    if sort_field == "id":
        ordered = list(reversed(ids)) if descending else ids
    else:
        if sort_field == "top_confidence":
            column = index.confidence if index.confidence is not None else None
            key = (lambda i: float(column[i])) if column is not None else (lambda i: 0.0)
        elif sort_field == "label":
            key = lambda i: index.labels[i]
        else:  # prediction
            preds = index.predictions
            key = (lambda i: preds[i]) if preds is not None else (lambda i: "")
        ordered = sorted(ids, key=key, reverse=descending)
    total = len(ordered)
    page = ordered[offset : offset + limit]
    return total, [index.row(i) for i in page]


@dataclass(frozen=True)
class ProposedActionRecord:
    split: str
    id: int
    value: str
    updated_at: str


class ActionStore:
    """Append-compacted JSONL store of proposed actions keyed by
    (split, utterance id).  Writes are serialized by a lock; the last
    committed value wins on replay."""

    COMPACT_MIN_LINES = 1024

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[tuple[str, int], ProposedActionRecord] = {}
        self._lines_on_disk = 0
        self.version = 0  # bumped on every write; lets callers invalidate snapshots
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    raw = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise IoError(f"{self.path}: corrupt action record: {exc}") from exc
                record = ProposedActionRecord(
                    split=str(raw["split"]),
                    id=int(raw["id"]),
                    value=str(raw["value"]),
                    updated_at=str(raw.get("updated_at", "")),
                )
                self._records[(record.split, record.id)] = record
                self._lines_on_disk += 1
        if (
            self._lines_on_disk >= self.COMPACT_MIN_LINES
            and self._lines_on_disk > 4 * len(self._records)
        ):
            self._compact()

    def _compact(self) -> None:
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            for record in self._records.values():
                fh.write(json.dumps(record.__dict__, ensure_ascii=False) + "\n")
        tmp.replace(self.path)
        self._lines_on_disk = len(self._records)

    def get(self, split: str, utterance_id: int) -> str:
        record = self._records.get((split, utterance_id))
        return record.value if record else DEFAULT_ACTION

    def by_split(self, split: str) -> dict[int, str]:
        return {
            uid: record.value
            for (s, uid), record in self._records.items()
            if s == split
        }

    def set(self, split: str, utterance_id: int, value: str) -> ProposedActionRecord:
        if value not in PROPOSED_ACTIONS:
            raise UnknownAction(f"unknown proposed action {value!r}")
        record = ProposedActionRecord(
            split=split,
            id=utterance_id,
            value=value,
            updated_at=datetime.now(timezone.utc).isoformat(),
        )
        with self._lock:
            self._records[(split, utterance_id)] = record
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.__dict__, ensure_ascii=False) + "\n")
            self._lines_on_disk += 1
            self.version += 1
        return record

    def non_default(self) -> list[ProposedActionRecord]:
        return [r for r in self._records.values() if r.value != DEFAULT_ACTION]


def set_proposed_action(
    store: ActionStore, state: ProjectState, split: str, utterance_id: int, value: str
) -> ProposedActionRecord:
    if split not in state.splits:
        raise UnknownUtterance(f"unknown split {split!r}")
    if not 0 <= utterance_id < len(state.splits[split]):
        raise UnknownUtterance(f"no utterance {utterance_id} in split {split!r}")
    return store.set(split, utterance_id, value)


def proposed_action_rows(store: ActionStore, state: ProjectState) -> list[list]:
    """Export rows for every non-default action, ordered by (split, id)."""
    rows = []
    for record in sorted(store.non_default(), key=lambda r: (r.split, r.id)):
        split = state.splits.get(record.split)
        if split is None or record.id >= len(split):
            continue
        u = split.utterances[record.id]
        rows.append([record.split, record.id, u.text, u.label, record.value])
    return rows


def proposed_actions_csv(store: ActionStore, state: ProjectState) -> tuple[str, int]:
    """CSV text (quoted fields, header row) plus the data row count."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_ALL)
    writer.writerow(["split", "id", "text", "label", "proposed_action"])
    rows = proposed_action_rows(store, state)
    writer.writerows(rows)
    return buffer.getvalue(), len(rows)


def export_proposed_actions(store: ActionStore, state: ProjectState, path: str | Path) -> int:
    """Write non-default actions as CSV; returns the data row count."""
    text, count = proposed_actions_csv(store, state)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc
    return count
