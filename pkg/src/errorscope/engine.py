"""Facade tying the loaded project state to the cached analyses.

All HTTP handlers and the CLI report path call through this class, so a
query answered over the API is byte-for-byte the module result.  Expensive
computations (warnings, neighbor tables, behavioral results, tag maps,
dashboard metrics) go through the single-flight scheduler; fast filtered
queries are answered live from columnar indexes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import behavioral as behavioral_mod
from . import dataset_warnings as warnings_mod
from . import prediction as prediction_mod
from . import tagging as tagging_mod
from . import wordclouds as wordclouds_mod
from .config import ProjectConfig
from .errors import MissingSaliency, UnknownPipeline, UnknownSplit
from .ingestion import ProjectState
from .prediction import MetricsReport, PredictionView
from .scheduler import AnalysisScheduler, StartupReport, TaskKey
from .similarity import NeighborList, neighbor_table
from .tagging import ActionStore, FilterIndex, FilterSpec

# Tunables each cached module reads; its cache key hashes exactly these.
MODULE_TUNABLES = {
    "dataset_warnings": [
        "min_per_class",
        "proportion_delta",
        "mean_delta_tokens",
        "std_delta_tokens",
    ],
    "neighbors": ["knn_k"],
    "behavioral": ["n_typo_variants", "conf_delta_max"],
    "smart_tags": [
        "short_sentence_tokens",
        "long_sentence_tokens",
        "tau_close",
        "knn_k",
        "tau_same",
        "tau_epistemic",
        "n_typo_variants",
        "conf_delta_max",
    ],
    "metrics": ["ece_bins", "histogram_bins"],
}

# Similarity tags carry only these target-split suffixes.
SIMILARITY_TARGETS = ("train", "eval")


@dataclass
class BehavioralSummary:
    available: bool
    families: dict[str, dict]
    tests: dict[str, dict]


class AnalysisEngine:
    def __init__(
        self,
        state: ProjectState,
        scheduler: AnalysisScheduler | None = None,
        action_store: ActionStore | None = None,
    ):
        self.state = state
        self.config: ProjectConfig = state.config
        self.scheduler = scheduler or AnalysisScheduler(self.config.cache_dir)
        self.actions = action_store or ActionStore(self.config.action_store_path)
        self._startup_report: StartupReport | None = None
        self._index_lock = threading.Lock()
        self._indexes: dict[tuple, FilterIndex] = {}

    # --- resolution helpers ---

    def require_split(self, name: str):
        if name not in self.state.splits:
            raise UnknownSplit(f"unknown split {name!r}")
        return self.state.splits[name]

    def resolve_pipeline(self, pipeline_id: str | None) -> str:
        if pipeline_id is None:
            if not self.config.pipelines:
                raise UnknownPipeline("project has no pipelines configured")
            return self.config.pipelines[0].id
        if pipeline_id not in self.config.pipeline_ids:
            raise UnknownPipeline(f"unknown pipeline {pipeline_id!r}")
        return pipeline_id

    def _predictions(self, pipeline_id: str, split: str) -> np.ndarray:
        key = (pipeline_id, split)
        if key not in self.state.predictions:
            raise UnknownPipeline(
                f"pipeline {pipeline_id!r} has no predictions for split {split!r}"
            )
        return self.state.predictions[key]

    def view(self, split: str, pipeline_id: str, postprocessed: bool) -> PredictionView:
        table = self._predictions(pipeline_id, split)
        threshold = (
            self.config.pipeline(pipeline_id).prediction_threshold if postprocessed else 0.0
        )
        return PredictionView.build(
            table,
            self.state.splits[split].labels,
            threshold,
            self.config.rejection_class,
            self.config.classes,
        )

    # --- cached module computations ---

    def _key(self, module: str, split: str, pipeline_id: str | None) -> TaskKey:
        digest = self.config.tunables_digest(
            MODULE_TUNABLES.get(module, []), pipeline_id
        )
        return TaskKey(module, split, pipeline_id, digest)

    def dataset_warnings(self) -> list[warnings_mod.DatasetWarning]:
        def compute():
            thresholds = self.config.thresholds
            out = []
            for name in sorted(self.state.splits):
                out.extend(
                    warnings_mod.class_size_warnings(self.state.splits[name], thresholds)
                )
            train = self.state.splits["train"]
            eval_split = self.state.splits["eval"]
            out.extend(warnings_mod.split_shift_warnings(train, eval_split, thresholds))
            out.extend(
                warnings_mod.length_mismatch_warning(
                    train, eval_split, thresholds, self.state.syntax
                )
            )
            return out

        return self.scheduler.get_or_compute(
            self._key("dataset_warnings", "train+eval", None), compute
        )

    def neighbor_tables(self, query_split: str) -> dict[str, list[NeighborList]]:
        """Neighbor lists of one split against each similarity target that
        has embeddings; empty when the query split has none."""
        if query_split not in self.state.embeddings:
            return {}
        out = {}
        for target in SIMILARITY_TARGETS:
            if target not in self.state.embeddings:
                continue
            key = self._key(f"neighbors_vs_{target}", query_split, None)
            out[target] = self.scheduler.get_or_compute(
                key,
                lambda t=target: neighbor_table(
                    self.state, query_split, t, self.config.thresholds.knn_k
                ),
            )
        return out

    def _behavioral_provider(self, split: str, pipeline_id: str):
        pipeline = self.config.pipeline(pipeline_id)
        table = self.state.perturbed.get((pipeline_id, split))
        if table is not None:
            return behavioral_mod.FileBackedProvider(table)
        if pipeline.provider_url:
            return behavioral_mod.RemoteProvider(pipeline.provider_url)
        return None

    def behavioral_available(self, split: str, pipeline_id: str) -> bool:
        return (
            (pipeline_id, split) in self.state.predictions
            and self._behavioral_provider(split, pipeline_id) is not None
        )

    def behavioral_results(
        self, split: str, pipeline_id: str
    ) -> list[behavioral_mod.InvarianceResult]:
        provider = self._behavioral_provider(split, pipeline_id)
        if provider is None:
            return []

        def compute():
            pipeline = self.config.pipeline(pipeline_id)
            return behavioral_mod.evaluate_invariance(
                self.state.splits[split].utterances,
                self._predictions(pipeline_id, split),
                provider,
                pipeline.prediction_threshold,
                self.config.rejection_class,
                self.config.classes,
                self.config.seed,
                self.config.thresholds.n_typo_variants,
                self.config.thresholds.conf_delta_max,
            )

        return self.scheduler.get_or_compute(
            self._key("behavioral", split, pipeline_id), compute
        )

    def tag_map(self, split: str, pipeline_id: str | None) -> dict[int, frozenset[str]]:
        def compute():
            neighbor_tables = self.neighbor_tables(split)
            behavioral_tags = None
            if pipeline_id is not None and self.behavioral_available(split, pipeline_id):
                results = self.behavioral_results(split, pipeline_id)
                behavioral_tags, _ = behavioral_mod.behavioral_tags_and_summary(results)
            return tagging_mod.evaluate_all_tags(
                self.state, split, pipeline_id, neighbor_tables, behavioral_tags
            )

        return self.scheduler.get_or_compute(
            self._key("smart_tags", split, pipeline_id), compute
        )

    def dashboard_metrics(self, split: str, pipeline_id: str) -> dict[str, MetricsReport]:
        """Unfiltered metrics for both post-processing stages."""

        def compute():
            rows = np.arange(len(self.state.splits[split]))
            bins = self.config.thresholds.ece_bins
            return {
                "postprocessed": prediction_mod.compute_metrics(
                    self.view(split, pipeline_id, True), rows, bins
                ),
                "raw": prediction_mod.compute_metrics(
                    self.view(split, pipeline_id, False), rows, bins
                ),
            }

        return self.scheduler.get_or_compute(
            self._key("metrics", split, pipeline_id), compute
        )

    # --- filtered queries ---

    def filter_index(
        self, split: str, pipeline_id: str | None, postprocessed: bool
    ) -> FilterIndex:
        cache_key = (split, pipeline_id, postprocessed, self.actions.version)
        with self._index_lock:
            index = self._indexes.get(cache_key)
        if index is not None:
            return index
        view = None
        if pipeline_id is not None and (pipeline_id, split) in self.state.predictions:
            view = self.view(split, pipeline_id, postprocessed)
        index = FilterIndex(
            self.state.splits[split],
            view,
            self.tag_map(split, pipeline_id),
            self.actions.by_split(split),
        )
        with self._index_lock:
            # drop stale snapshots of earlier action versions
            self._indexes = {k: v for k, v in self._indexes.items() if k[3] == self.actions.version}
            self._indexes[cache_key] = index
        return index

    def _spec_context(self, split: str, spec: FilterSpec) -> tuple[FilterIndex, str | None]:
        self.require_split(split)
        pipeline_id = None
        if self.config.pipelines:
            pipeline_id = self.resolve_pipeline(spec.pipeline_id)
        return self.filter_index(split, pipeline_id, spec.postprocessed), pipeline_id

    def utterances(
        self,
        split: str,
        spec: FilterSpec,
        sort_field: str = "id",
        descending: bool = False,
        offset: int = 0,
        limit: int = 50,
    ):
        index, _ = self._spec_context(split, spec)
        return tagging_mod.filter_utterances(index, spec, sort_field, descending, offset, limit)

    def metrics(self, split: str, spec: FilterSpec) -> MetricsReport:
        index, pipeline_id = self._spec_context(split, spec)
        if pipeline_id is None:
            raise UnknownPipeline("metrics need a configured pipeline")
        rows = index.matching_ids(spec)
        return prediction_mod.compute_metrics(
            self.view(split, pipeline_id, spec.postprocessed),
            rows,
            self.config.thresholds.ece_bins,
        )

    def confusion_matrix(self, split: str, spec: FilterSpec, normalized: bool = False):
        index, pipeline_id = self._spec_context(split, spec)
        if pipeline_id is None:
            raise UnknownPipeline("the confusion matrix needs a configured pipeline")
        rows = index.matching_ids(spec)
        return prediction_mod.confusion_matrix(
            self.view(split, pipeline_id, spec.postprocessed), rows, normalized
        )

    def confidence_histogram(self, split: str, spec: FilterSpec):
        index, pipeline_id = self._spec_context(split, spec)
        if pipeline_id is None:
            raise UnknownPipeline("the confidence histogram needs a configured pipeline")
        rows = index.matching_ids(spec)
        return prediction_mod.confidence_histogram(
            self.view(split, pipeline_id, spec.postprocessed),
            rows,
            self.config.thresholds.histogram_bins,
        )

    def top_words(self, split: str, spec: FilterSpec, n: int = 30):
        index, pipeline_id = self._spec_context(split, spec)
        if pipeline_id is None:
            raise UnknownPipeline("word importance needs a configured pipeline")
        table = self.state.saliency.get((pipeline_id, split))
        if table is None:
            raise MissingSaliency(
                f"no saliency table for pipeline {pipeline_id!r} on split {split!r}"
            )
        view = self.view(split, pipeline_id, spec.postprocessed)
        rows = index.matching_ids(spec)
        saliency_rows = {int(i): table[int(i)] for i in rows}
        correctness = {int(i): view.outcome(int(i)).is_correct for i in rows}
        correct, incorrect = wordclouds_mod.top_salient_words(
            saliency_rows, correctness, self.config.stopwords, n
        )
        return correct, incorrect

    def behavioral_summary(self, split: str, pipeline_id: str | None) -> BehavioralSummary:
        self.require_split(split)
        pipeline_id = self.resolve_pipeline(pipeline_id)
        if not self.behavioral_available(split, pipeline_id):
            return BehavioralSummary(available=False, families={}, tests={})
        results = self.behavioral_results(split, pipeline_id)
        _, rates = behavioral_mod.behavioral_tags_and_summary(results)
        tests: dict[str, dict] = {}
        for r in results:
            entry = tests.setdefault(
                r.variant.test_name, {"failed": 0, "total": 0, "family": r.variant.family}
            )
            entry["total"] += 1
            if not r.passed:
                entry["failed"] += 1
        for entry in tests.values():
            entry["rate"] = entry["failed"] / entry["total"] if entry["total"] else 0.0
        return BehavioralSummary(
            available=True,
            families={
                family: {"failed": fr.failed, "total": fr.total, "rate": fr.rate}
                for family, fr in rates.items()
            },
            tests=dict(sorted(tests.items())),
        )

    def threshold_comparison(
        self, pipeline_id: str | None, split: str = "eval", thresholds: list[float] | None = None
    ):
        self.require_split(split)
        pipeline_id = self.resolve_pipeline(pipeline_id)
        if thresholds is None:
            thresholds = [round(i * 0.05, 2) for i in range(21)]
        return prediction_mod.threshold_sweep(
            self._predictions(pipeline_id, split),
            self.state.splits[split].labels,
            thresholds,
            self.config.rejection_class,
            self.config.classes,
            self.config.thresholds.ece_bins,
        )

    # --- per-utterance detail ---

    def utterance_detail(self, split: str, utterance_id: int, pipeline_id: str | None) -> dict:
        from .errors import UnknownUtterance

        dataset = self.require_split(split)
        if not 0 <= utterance_id < len(dataset):
            raise UnknownUtterance(f"no utterance {utterance_id} in split {split!r}")
        u = dataset.utterances[utterance_id]
        resolved = None
        if self.config.pipelines:
            resolved = self.resolve_pipeline(pipeline_id)

        detail: dict = {
            "id": u.id,
            "split": split,
            "text": u.text,
            "label": u.label,
            "proposed_action": self.actions.get(split, u.id),
            "smart_tags": sorted(self.tag_map(split, resolved).get(u.id, frozenset())),
            "predictions": None,
            "neighbors": {},
            "saliency": None,
            "behavioral": [],
        }

        if resolved is not None and (resolved, split) in self.state.predictions:
            probs = self.state.predictions[(resolved, split)][u.id]
            threshold = self.config.pipeline(resolved).prediction_threshold
            raw = prediction_mod.postprocess(
                probs, 0.0, self.config.rejection_class, self.config.classes
            )
            post = prediction_mod.postprocess(
                probs, threshold, self.config.rejection_class, self.config.classes
            )
            detail["predictions"] = {
                "pipeline_id": resolved,
                "stages": {
                    "raw": _post_payload(raw, u.label, self.config.rejection_class),
                    "postprocessed": _post_payload(post, u.label, self.config.rejection_class),
                },
                "probs": [float(p) for p in probs],
            }

        for target, table in self.neighbor_tables(split).items():
            nl = table[u.id]
            target_split = self.state.splits[target]
            detail["neighbors"][target] = [
                {
                    "id": nid,
                    "similarity": sim,
                    "text": target_split.utterances[nid].text,
                    "label": target_split.utterances[nid].label,
                }
                for nid, sim in nl.neighbors
            ]

        if resolved is not None:
            table = self.state.saliency.get((resolved, split))
            if table is not None:
                row = table[u.id]
                detail["saliency"] = {
                    "tokens": list(row.tokens),
                    "scores": [float(s) for s in row.scores],
                }
            if self.behavioral_available(split, resolved):
                detail["behavioral"] = [
                    {
                        "test_name": r.variant.test_name,
                        "family": r.variant.family,
                        "perturbed_text": r.variant.perturbed_text,
                        "original_class": r.original_class,
                        "perturbed_class": r.perturbed_class,
                        "confidence_delta": r.confidence_delta,
                        "passed": r.passed,
                    }
                    for r in self.behavioral_results(split, resolved)
                    if r.variant.id == u.id
                ]
        return detail

    # --- proposed actions ---

    def set_proposed_action(self, split: str, utterance_id: int, value: str):
        return tagging_mod.set_proposed_action(
            self.actions, self.state, split, utterance_id, value
        )

    def export_proposed_actions(self, path) -> int:
        return tagging_mod.export_proposed_actions(self.actions, self.state, path)

    # --- startup ---

    def warm_startup(self, block: bool = True) -> StartupReport:
        tasks = {self._key("dataset_warnings", "train+eval", None): self.dataset_warnings}
        for split in self.state.splits:
            for pipeline in self.config.pipelines:
                if (pipeline.id, split) in self.state.predictions:
                    tasks[self._key("metrics", split, pipeline.id)] = (
                        lambda s=split, p=pipeline.id: self.dashboard_metrics(s, p)
                    )
                tasks[self._key("smart_tags", split, pipeline.id)] = (
                    lambda s=split, p=pipeline.id: self.tag_map(s, p)
                )
            if not self.config.pipelines:
                tasks[self._key("smart_tags", split, None)] = (
                    lambda s=split: self.tag_map(s, None)
                )
        report = self.scheduler.warm_startup(tasks, block=block)
        self._startup_report = report
        return report

    def status(self) -> dict:
        report = self._startup_report
        return {
            "project_name": self.config.project_name,
            "config_hash": self.config.config_hash,
            "splits": {name: len(s) for name, s in self.state.splits.items()},
            "pipelines": self.config.pipeline_ids,
            "startup": report.snapshot() if report else [],
            "counts": report.counts if report else {},
            "ready": report.all_done if report else False,
        }


def _post_payload(post, label: str, rejection_class: str) -> dict:
    from .prediction import outcome_of

    return {
        "top_class": post.top_class,
        "top_confidence": post.top_confidence,
        "ranked_classes": list(post.ranked_classes[:5]),
        "outcome": outcome_of(label, post, rejection_class).value,
    }
