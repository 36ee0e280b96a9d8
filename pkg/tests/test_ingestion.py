import numpy as np
import pytest

from errorscope.errors import MalformedRow, RowCountMismatch
from errorscope.formats import write_jsonl, write_matrix
from errorscope.ingestion import load_artifacts, state_fingerprint, validate_artifacts

from conftest import minimal_datasets, probs_for


def test_alignment_by_row_order(small_project):
    state = small_project.load()
    assert len(state.splits["eval"]) == 5
    table = state.predictions[("main", "eval")]
    assert table.shape == (5, 4)
    assert state.splits["eval"].utterances[1].text == "what's today's high and low"
    assert table[1].argmax() == 3


def test_row_count_mismatch_names_file(builder):
    builder.datasets = minimal_datasets()
    builder.predictions = {
        "main": {"eval": [probs_for(0, 0.9, 4)] * 5}
    }
    builder.embeddings = {"eval": np.ones((3, 4))}  # 3 rows for a 5-row split
    with pytest.raises(RowCountMismatch, match="emb_eval.bin"):
        builder.load()


def test_undeclared_label_is_malformed(builder):
    builder.datasets = {
        "train": [("hello", "greeting"), ("what gives", "mystery")],
        "eval": [("hi", "greeting")],
    }
    builder.predictions = {"main": {"eval": [probs_for(0, 0.9, 4)]}}
    with pytest.raises(MalformedRow, match="mystery"):
        builder.load()


def test_dataset_ids_must_be_positional(builder, tmp_path):
    builder.datasets = minimal_datasets()
    builder.predictions = {"main": {"eval": [probs_for(0, 0.9, 4)] * 5}}
    config_path = builder.write()
    bad = builder.root / "train.jsonl"
    write_jsonl(
        bad,
        [
            {"id": 0, "text": "hello", "label": "greeting"},
            {"id": 5, "text": "what is the weather", "label": "weather"},
        ],
    )
    from errorscope.config import load_config

    with pytest.raises(MalformedRow, match="positional"):
        load_artifacts(load_config(config_path))


def test_empty_text_rejected(builder):
    builder.datasets = {
        "train": [("hello", "greeting"), ("   ", "weather")],
        "eval": [("hi", "greeting")],
    }
    builder.predictions = {"main": {"eval": [probs_for(0, 0.9, 4)]}}
    with pytest.raises(MalformedRow, match="non-empty"):
        builder.load()


def test_validation_flags_bad_probability_sum(builder):
    builder.datasets = minimal_datasets()
    rows = [probs_for(0, 0.9, 4) for _ in range(5)]
    rows[2] = [0.3, 0.3, 0.2, 0.1]
    rows[2][0] = 0.2  # sums to 0.8
    builder.predictions = {"main": {"eval": rows, "train": [probs_for(0, 0.9, 4)] * 8}}
    state = builder.load()
    report = validate_artifacts(state)
    assert not report.ok
    assert any(
        i.check == "probability_sum" and i.utterance_id == 2 for i in report.issues
    )


def test_validation_flags_nan_embedding(builder):
    builder.datasets = minimal_datasets()
    builder.predictions = {"main": {"eval": [probs_for(0, 1.0, 4)] * 5}}
    matrix = np.ones((5, 3))
    matrix[3, 1] = np.nan
    builder.embeddings = {"eval": matrix}
    report = validate_artifacts(builder.load())
    assert not report.ok
    assert any(i.check == "embedding_finite" and i.utterance_id == 3 for i in report.issues)


def test_all_valid_fixture_is_ok(small_project):
    report = validate_artifacts(small_project.load())
    assert report.ok
    assert report.issues == []


def test_validation_flags_denormalized_saliency(builder):
    builder.datasets = minimal_datasets()
    builder.predictions = {"main": {"eval": [probs_for(0, 1.0, 4)] * 5}}
    builder.saliency = {
        "main": {
            "eval": [
                {"id": i, "tokens": ["a", "b"], "scores": [0.5, 0.5]} for i in range(4)
            ]
            + [{"id": 4, "tokens": ["a", "b"], "scores": [0.9, 0.4]}]
        }
    }
    report = validate_artifacts(builder.load())
    assert [i.utterance_id for i in report.issues] == [4]
    assert report.issues[0].check == "saliency_normalized"


def test_validation_flags_unknown_perturbed_utterance(builder):
    builder.datasets = minimal_datasets()
    builder.predictions = {"main": {"eval": [probs_for(0, 1.0, 4)] * 5}}
    builder.perturbed = {
        "main": {
            "eval": [
                {"id": 0, "test_name": "ending_period_add", "probs": probs_for(0, 1.0, 4)},
                {"id": 42, "test_name": "ending_period_add", "probs": probs_for(0, 1.0, 4)},
            ]
        }
    }
    report = validate_artifacts(builder.load())
    assert any(i.check == "utterance_exists" and i.utterance_id == 42 for i in report.issues)


def test_loading_is_deterministic(small_project):
    state_a = small_project.load()
    state_b = small_project.load()
    assert state_fingerprint(state_a) == state_fingerprint(state_b)


def test_mc_table_shape_round_trip(builder, tmp_path):
    table = np.full((5, 3, 4), 0.25)
    path = tmp_path / "mc.bin"
    write_matrix(path, table)
    from errorscope.formats import read_matrix

    loaded = read_matrix(path, 5, with_samples=True)
    assert loaded.shape == (5, 3, 4)
    np.testing.assert_allclose(loaded, table)


def test_embedding_round_trip_is_float32(tmp_path):
    rng = np.random.default_rng(0)
    matrix = rng.normal(size=(7, 5))
    path = tmp_path / "emb.bin"
    write_matrix(path, matrix)
    from errorscope.formats import read_matrix

    loaded = read_matrix(path, 7)
    np.testing.assert_allclose(loaded, matrix.astype(np.float32).astype(np.float64))
