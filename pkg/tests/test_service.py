import csv
import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from hypothesis import given, settings
from hypothesis import strategies as st

from errorscope.behavioral import generate_perturbations
from errorscope.service import (
    create_app,
    encode_filter_spec,
    parse_query_string,
)
from errorscope.tagging import ALL_TAGS, FilterSpec

from conftest import ProjectBuilder, minimal_datasets, probs_for


@pytest.fixture(scope="module")
def rich_project(tmp_path_factory):
    """Project with every optional artifact populated."""
    root = tmp_path_factory.mktemp("rich")
    builder = ProjectBuilder(root=root / "project")
    datasets = minimal_datasets()
    builder.datasets = datasets
    c = builder.classes
    eval_probs = [
        probs_for(0, 0.85, 4),
        probs_for(3, 0.41, 4),
        probs_for(2, 0.75, 4),
        probs_for(1, 0.55, 4),
        probs_for(0, 0.30, 4),
    ]
    builder.predictions = {
        "main": {
            "train": [probs_for(c.index(label), 0.9, 4) for _, label in datasets["train"]],
            "eval": eval_probs,
        }
    }
    rng = np.random.default_rng(0)
    builder.embeddings = {
        "train": rng.normal(size=(8, 6)),
        "eval": rng.normal(size=(5, 6)),
    }
    builder.syntax = {
        "eval": [
            {"id": i, "has_subject": True, "has_verb": i != 1, "has_object": True}
            for i in range(5)
        ]
    }
    builder.saliency = {
        "main": {
            "eval": [
                {
                    "id": i,
                    "tokens": text.split(),
                    "scores": [round(1 / len(text.split()), 10)] * len(text.split()),
                }
                for i, (text, _) in enumerate(datasets["eval"])
            ]
        }
    }
    mc = np.stack([np.tile(row, (4, 1)) for row in eval_probs])
    builder.mc_samples = {"main": {"eval": mc}}

    perturbed_rows = []
    for i, (text, _) in enumerate(datasets["eval"]):
        for variant in generate_perturbations(text, i, "eval", seed=42):
            probs = eval_probs[i]
            if variant.test_name == "ending_question" and i == 2:
                probs = probs_for(1, 0.9, 4)  # planted failure
            perturbed_rows.append(
                {"id": i, "test_name": variant.test_name, "probs": list(probs)}
            )
    builder.perturbed = {"main": {"eval": perturbed_rows}}
    return builder


@pytest.fixture(scope="module")
def engine(rich_project):
    engine = rich_project.engine()
    engine.warm_startup(block=True)
    return engine


@pytest.fixture(scope="module")
def client(engine):
    return TestClient(create_app(engine))


def test_status_ready_after_warm(client):
    payload = client.get("/admin/status").json()
    assert payload["ready"] is True
    assert payload["counts"].get("done", 0) > 0
    assert payload["splits"] == {"train": 8, "eval": 5}


def test_config_endpoint(client):
    payload = client.get("/config").json()
    assert payload["rejection_class"] == "oos"
    assert payload["pipelines"] == [{"id": "main", "prediction_threshold": 0.5}]
    assert set(payload["smart_tag_families"]) == {
        "extreme_length",
        "partial_syntax",
        "dissimilar",
        "behavioral",
        "almost_correct",
        "uncertain",
        "pipeline_comparison",
    }


def test_warnings_endpoint_matches_engine(client, engine):
    payload = client.get("/dashboard/warnings").json()["warnings"]
    expected = engine.dataset_warnings()
    assert len(payload) == len(expected)
    for got, want in zip(payload, expected):
        assert got["kind"] == want.kind.value
        assert got["class"] == want.class_name
        assert got["evidence"] == want.evidence


def test_metrics_endpoint_matches_engine(client, engine):
    response = client.get("/dataset_splits/eval/metrics").json()
    report = engine.metrics("eval", FilterSpec())
    assert response["accuracy"] == report.accuracy
    assert response["ece"] == report.ece
    assert response["outcome_counts"] == report.outcome_counts
    assert response["total"] == 5


def test_metrics_filtered_equals_module_call(client, engine):
    query = "labels=weather&labels=distance&postprocessed=false"
    response = client.get(f"/dataset_splits/eval/metrics?{query}").json()
    spec = parse_query_string(query)
    report = engine.metrics("eval", spec)
    assert response["accuracy"] == report.accuracy
    assert response["total"] == report.total == 2


def test_impossible_filter_returns_empty_report_not_error(client):
    response = client.get("/dataset_splits/eval/metrics?substring=zzzznope")
    assert response.status_code == 200
    payload = response.json()
    assert payload["empty"] is True
    assert payload["total"] == 0


def test_utterances_pagination_and_shape(client, engine):
    response = client.get("/dataset_splits/eval/utterances?limit=2&offset=1").json()
    assert response["total_count"] == 5
    assert [r["id"] for r in response["rows"]] == [1, 2]
    row = response["rows"][0]
    assert row["prediction"] == "oos"  # 0.41 below threshold
    assert row["outcome"] == "IncorrectAndRejected"
    assert "short_sentence" not in row["smart_tags"]


def test_utterances_tag_filter_matches_module(client, engine):
    query = "smart_tags=missing_verb"
    response = client.get(f"/dataset_splits/eval/utterances?{query}").json()
    spec = parse_query_string(query)
    total, rows = engine.utterances("eval", spec)
    assert response["total_count"] == total == 1
    assert response["rows"][0]["id"] == rows[0].id == 1


def test_utterance_detail_sections(client):
    payload = client.get("/dataset_splits/eval/utterances/1").json()
    assert payload["text"] == "what's today's high and low"
    assert payload["label"] == "weather"
    assert payload["predictions"]["stages"]["raw"]["top_class"] == "travel_alert"
    assert payload["predictions"]["stages"]["raw"]["top_confidence"] == pytest.approx(0.41)
    assert payload["predictions"]["stages"]["postprocessed"]["top_class"] == "oos"
    assert set(payload["neighbors"]) == {"train", "eval"}
    assert len(payload["neighbors"]["train"]) > 0
    assert payload["saliency"]["tokens"] == ["what's", "today's", "high", "and", "low"]
    assert payload["behavioral"], "behavioral results should be attached"
    assert "missing_verb" in payload["smart_tags"]


def test_detail_unknown_utterance_404(client):
    response = client.get("/dataset_splits/eval/utterances/999")
    assert response.status_code == 404
    assert response.json()["code"] == "unknown_utterance"


def test_unknown_split_404(client):
    response = client.get("/dataset_splits/nope/metrics")
    assert response.status_code == 404
    assert response.json()["code"] == "unknown_split"


def test_patch_proposed_action_and_readback(client):
    response = client.patch(
        "/dataset_splits/eval/utterances/3/proposed_action", json={"value": "relabel"}
    )
    assert response.status_code == 200
    assert response.json()["value"] == "relabel"
    detail = client.get("/dataset_splits/eval/utterances/3").json()
    assert detail["proposed_action"] == "relabel"


def test_patch_bad_enum_is_422(client):
    response = client.patch(
        "/dataset_splits/eval/utterances/3/proposed_action", json={"value": "obliterate"}
    )
    assert response.status_code == 422
    assert response.json()["code"] == "unknown_action"


def test_confusion_endpoint_matches_engine(client, engine):
    response = client.get("/dataset_splits/eval/confusion_matrix?normalized=true").json()
    _, _, expected = engine.confusion_matrix("eval", FilterSpec(), normalized=True)
    assert response["matrix"] == expected.tolist()
    assert response["row_classes"][-1] == "oos"


def test_histogram_endpoint_matches_engine(client, engine):
    response = client.get("/dataset_splits/eval/confidence_histogram").json()
    hist = engine.confidence_histogram("eval", FilterSpec())
    assert response["correct"] == hist.correct
    assert response["incorrect"] == hist.incorrect
    assert len(response["bin_edges"]) == 21


def test_top_words_endpoint(client):
    response = client.get("/dataset_splits/eval/top_words?n=5").json()
    words = {w["word"] for w in response["correct"]} | {
        w["word"] for w in response["incorrect"]
    }
    assert words
    assert all(w == w.lower() for w in words)


def test_behavioral_summary_endpoint(client, engine):
    response = client.get("/dataset_splits/eval/behavioral_summary").json()
    assert response["available"] is True
    assert response["families"]["punctuation"]["failed"] == 1
    assert response["families"]["fuzzy_matching"]["failed"] == 0
    assert "ending_question" in response["tests"]


def test_threshold_comparison_endpoint(client, engine):
    response = client.get(
        "/threshold_comparison?pipeline=main&split=eval&threshold=0.0&threshold=0.5&threshold=1.0"
    ).json()
    assert [p["threshold"] for p in response["points"]] == [0.0, 0.5, 1.0]
    points = engine.threshold_comparison("main", "eval", [0.0, 0.5, 1.0])
    assert response["points"][1]["accuracy"] == points[1].accuracy


def test_static_ui_mount(engine, tmp_path):
    (tmp_path / "index.html").write_text("<!doctype html><title>ui</title>")
    ui_client = TestClient(create_app(engine, ui_dir=str(tmp_path)))
    page = ui_client.get("/")
    assert page.status_code == 200
    assert "ui" in page.text
    # API routes keep precedence over the static mount
    assert ui_client.get("/admin/status").json()["ready"] is True


def test_export_csv_attachment(client):
    response = client.get("/export/proposed_actions")
    assert response.status_code == 200
    assert response.headers["content-disposition"].startswith("attachment")
    rows = list(csv.reader(io.StringIO(response.text)))
    assert rows[0] == ["split", "id", "text", "label", "proposed_action"]
    assert ["eval", "3", "is it safe to travel to peru", "travel_alert", "relabel"] in rows


# --- FilterSpec query codec ---

spec_strategy = st.builds(
    FilterSpec,
    labels=st.frozensets(st.sampled_from(["a", "b", "weather c"]), max_size=2),
    predictions=st.frozensets(st.sampled_from(["a", "oos"]), max_size=2),
    outcomes=st.frozensets(
        st.sampled_from(["CorrectAndPredicted", "IncorrectAndRejected"]), max_size=2
    ),
    smart_tags=st.frozensets(st.sampled_from(sorted(ALL_TAGS)), max_size=3),
    data_actions=st.frozensets(st.sampled_from(["relabel", "remove", "no_action"]), max_size=2),
    confidence_min=st.floats(0, 0.5),
    confidence_max=st.floats(0.5, 1.0),
    substring=st.text(
        alphabet=st.characters(blacklist_categories=("Cs", "Cc")), max_size=8
    ),
    pipeline_id=st.one_of(st.none(), st.just("main"), st.just("other pipe")),
    postprocessed=st.booleans(),
)


@given(spec_strategy)
@settings(max_examples=200)
def test_filter_spec_query_round_trip(spec):
    assert parse_query_string(encode_filter_spec(spec)) == spec
