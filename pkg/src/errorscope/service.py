"""HTTP JSON API over the analysis engine.

Handlers only translate between the wire format and engine calls; every
response equals the corresponding engine method on the same FilterSpec.
All reads are GET with query parameters so views are linkable; the only
mutation is the proposed-action PATCH.  Multi-valued facets encode as
repeated query keys.
"""

from __future__ import annotations

import urllib.parse
from dataclasses import asdict

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .engine import AnalysisEngine
from .errors import EngineError, InvalidRange
from .prediction import MetricsReport
from .tagging import PROPOSED_ACTIONS, SORT_FIELDS, TAG_FAMILIES, FilterSpec, proposed_actions_csv

MULTI_KEYS = ("labels", "predictions", "outcomes", "smart_tags", "data_actions")


def encode_filter_spec(spec: FilterSpec) -> str:
    """Query-string encoding; defaults are omitted, multi-values repeat
    their key in sorted order."""
    pairs: list[tuple[str, str]] = []
    for key in MULTI_KEYS:
        for value in sorted(getattr(spec, key)):
            pairs.append((key, value))
    if spec.confidence_min != 0.0:
        pairs.append(("confidence_min", repr(spec.confidence_min)))
    if spec.confidence_max != 1.0:
        pairs.append(("confidence_max", repr(spec.confidence_max)))
    if spec.substring:
        pairs.append(("substring", spec.substring))
    if spec.pipeline_id is not None:
        pairs.append(("pipeline_id", spec.pipeline_id))
    if not spec.postprocessed:
        pairs.append(("postprocessed", "false"))
    return urllib.parse.urlencode(pairs)


def _parse_bool(value: str, key: str) -> bool:
    if value in ("true", "1"):
        return True
    if value in ("false", "0"):
        return False
    raise InvalidRange(f"{key}: expected true or false, got {value!r}")


def _parse_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise InvalidRange(f"{key}: expected a number, got {value!r}")


def parse_filter_spec(params) -> FilterSpec:
    """Inverse of encode_filter_spec over any multi-dict with getlist."""
    spec = FilterSpec(
        labels=frozenset(params.getlist("labels")),
        predictions=frozenset(params.getlist("predictions")),
        outcomes=frozenset(params.getlist("outcomes")),
        smart_tags=frozenset(params.getlist("smart_tags")),
        data_actions=frozenset(params.getlist("data_actions")),
        confidence_min=_parse_float(params.get("confidence_min", "0"), "confidence_min"),
        confidence_max=_parse_float(params.get("confidence_max", "1"), "confidence_max"),
        substring=params.get("substring", ""),
        pipeline_id=params.get("pipeline_id"),
        postprocessed=_parse_bool(params.get("postprocessed", "true"), "postprocessed"),
    )
    spec.validate()
    return spec


def parse_query_string(query: str) -> FilterSpec:
    """Parse a bare query string (no request object needed)."""

    class _Params:
        def __init__(self, pairs):
            self.pairs = pairs

        def getlist(self, key):
            return [v for k, v in self.pairs if k == key]

        def get(self, key, default=None):
            for k, v in self.pairs:
                if k == key:
                    return v
            return default

    return parse_filter_spec(_Params(urllib.parse.parse_qsl(query, keep_blank_values=True)))


def _metrics_payload(report: MetricsReport) -> dict:
    payload = asdict(report)
    payload["per_class"] = {
        name: asdict(m) if not isinstance(m, dict) else m
        for name, m in payload["per_class"].items()
    }
    return payload


def create_app(engine: AnalysisEngine, ui_dir: str | None = None) -> FastAPI:
    """API app; when ui_dir is given, its static files are mounted at /
    (after the API routes) so a browser UI can share the origin."""
    app = FastAPI(title="errorscope", version="0.1.0")

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"status": exc.http_status, "code": exc.code, "message": exc.message},
        )

    def spec_of(request: Request) -> FilterSpec:
        return parse_filter_spec(request.query_params)

    @app.get("/admin/status")
    def admin_status():
        return engine.status()

    @app.get("/config")
    def get_config():
        config = engine.config
        return {
            "project_name": config.project_name,
            "classes": list(config.classes),
            "rejection_class": config.rejection_class,
            "seed": config.seed,
            "splits": list(config.splits),
            "pipelines": [
                {"id": p.id, "prediction_threshold": p.prediction_threshold}
                for p in config.pipelines
            ],
            "thresholds": asdict(config.thresholds),
            "smart_tag_families": {
                family: list(names) for family, names in TAG_FAMILIES.items()
            },
            "proposed_actions": list(PROPOSED_ACTIONS),
            "config_hash": config.config_hash,
        }

    @app.get("/dashboard/warnings")
    def dashboard_warnings():
        warnings = engine.dataset_warnings()
        return {
            "warnings": [
                {
                    "kind": w.kind.value,
                    "severity": w.severity,
                    "class": w.class_name,
                    "split": w.split,
                    "evidence": w.evidence,
                }
                for w in warnings
            ]
        }

    @app.get("/dataset_splits/{split}/utterances")
    def list_utterances(split: str, request: Request):
        spec = spec_of(request)
        params = request.query_params
        sort_field = params.get("sort", "id")
        if sort_field not in SORT_FIELDS:
            raise InvalidRange(f"sort must be one of {SORT_FIELDS}")
        descending = _parse_bool(params.get("descending", "false"), "descending")
        offset = int(params.get("offset", "0"))
        limit = int(params.get("limit", "50"))
        total, rows = engine.utterances(split, spec, sort_field, descending, offset, limit)
        return {
            "total_count": total,
            "offset": offset,
            "limit": limit,
            "rows": [asdict(r) for r in rows],
        }

    @app.get("/dataset_splits/{split}/utterances/{utterance_id}")
    def utterance_detail(split: str, utterance_id: int, request: Request):
        pipeline_id = request.query_params.get("pipeline_id")
        return engine.utterance_detail(split, utterance_id, pipeline_id)

    @app.patch("/dataset_splits/{split}/utterances/{utterance_id}/proposed_action")
    async def patch_proposed_action(split: str, utterance_id: int, request: Request):
        body = await request.json()
        value = body.get("value") if isinstance(body, dict) else None
        record = engine.set_proposed_action(split, utterance_id, str(value))
        return asdict(record)

    @app.get("/dataset_splits/{split}/metrics")
    def split_metrics(split: str, request: Request):
        return _metrics_payload(engine.metrics(split, spec_of(request)))

    @app.get("/dataset_splits/{split}/confusion_matrix")
    def split_confusion(split: str, request: Request):
        normalized = _parse_bool(request.query_params.get("normalized", "false"), "normalized")
        row_classes, col_classes, matrix = engine.confusion_matrix(
            split, spec_of(request), normalized
        )
        return {
            "row_classes": row_classes,
            "col_classes": col_classes,
            "normalized": normalized,
            "matrix": matrix.tolist(),
        }

    @app.get("/dataset_splits/{split}/confidence_histogram")
    def split_histogram(split: str, request: Request):
        hist = engine.confidence_histogram(split, spec_of(request))
        return asdict(hist)

    @app.get("/dataset_splits/{split}/top_words")
    def split_top_words(split: str, request: Request):
        n = int(request.query_params.get("n", "30"))
        correct, incorrect = engine.top_words(split, spec_of(request), n)
        return {
            "correct": [asdict(w) for w in correct],
            "incorrect": [asdict(w) for w in incorrect],
        }

    @app.get("/dataset_splits/{split}/behavioral_summary")
    def split_behavioral(split: str, request: Request):
        summary = engine.behavioral_summary(split, request.query_params.get("pipeline_id"))
        return asdict(summary)

    @app.get("/threshold_comparison")
    def threshold_comparison(request: Request):
        params = request.query_params
        pipeline_id = params.get("pipeline") or params.get("pipeline_id")
        split = params.get("split", "eval")
        raw = params.getlist("threshold")
        thresholds = [_parse_float(t, "threshold") for t in raw] if raw else None
        points = engine.threshold_comparison(pipeline_id, split, thresholds)
        return {
            "split": split,
            "points": [
                {
                    "threshold": p.threshold,
                    "accuracy": p.accuracy,
                    "outcome_counts": p.outcome_counts,
                }
                for p in points
            ],
        }

    @app.get("/export/proposed_actions")
    def export_actions():
        text, count = proposed_actions_csv(engine.actions, engine.state)
        return Response(
            content=text,
            media_type="text/csv; charset=utf-8",
            headers={
                "content-disposition": 'attachment; filename="proposed_actions.csv"',
                "x-row-count": str(count),
            },
        )

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
