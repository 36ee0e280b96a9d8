import pytest
import yaml

from errorscope.config import load_config
from errorscope.errors import (
    ConfigError,
    InvalidThreshold,
    MissingField,
    UnknownSplitName,
)


def write_config(tmp_path, payload):
    path = tmp_path / "config.yaml"
    with open(path, "w") as fh:
        yaml.safe_dump(payload, fh)
    return path


def minimal_payload():
    return {
        "project_name": "demo",
        "classes": ["a", "b"],
        "rejection_class": "oos",
        "splits": {"train": "train.jsonl", "eval": "eval.jsonl"},
        "pipelines": [{"id": "main", "predictions": {"eval": "p.jsonl"}}],
    }


def test_minimal_config_defaults(tmp_path):
    config = load_config(write_config(tmp_path, minimal_payload()))
    assert config.pipelines[0].prediction_threshold == 0.5
    assert config.seed == 42
    assert config.thresholds.min_per_class == 20
    assert config.thresholds.knn_k == 20
    assert config.thresholds.ece_bins == 10
    assert len(config.config_hash) == 16


def test_threshold_out_of_range(tmp_path):
    payload = minimal_payload()
    payload["pipelines"][0]["prediction_threshold"] = 1.5
    with pytest.raises(InvalidThreshold):
        load_config(write_config(tmp_path, payload))


def test_omitted_seed_defaults_to_42(tmp_path):
    payload = minimal_payload()
    payload.pop("seed", None)
    assert load_config(write_config(tmp_path, payload)).seed == 42


def test_missing_required_field_names_path(tmp_path):
    payload = minimal_payload()
    del payload["rejection_class"]
    with pytest.raises(MissingField, match="rejection_class"):
        load_config(write_config(tmp_path, payload))


def test_missing_eval_split(tmp_path):
    payload = minimal_payload()
    del payload["splits"]["eval"]
    with pytest.raises(MissingField, match="splits.eval"):
        load_config(write_config(tmp_path, payload))


def test_unknown_split_name_in_artifacts(tmp_path):
    payload = minimal_payload()
    payload["artifacts"] = {"embeddings": {"test": "emb.bin"}}
    with pytest.raises(UnknownSplitName, match="test"):
        load_config(write_config(tmp_path, payload))


def test_rejection_class_cannot_be_scored(tmp_path):
    payload = minimal_payload()
    payload["rejection_class"] = "a"
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, payload))


def test_config_hash_changes_with_tunables(tmp_path):
    base = load_config(write_config(tmp_path, minimal_payload()))
    payload = minimal_payload()
    payload["thresholds"] = {"min_per_class": 5}
    changed = load_config(write_config(tmp_path, payload))
    assert base.config_hash != changed.config_hash


def test_tunables_digest_sensitivity(tmp_path):
    payload = minimal_payload()
    a = load_config(write_config(tmp_path, payload))
    payload["thresholds"] = {"tau_close": 0.7}
    b = load_config(write_config(tmp_path, payload))
    assert a.tunables_digest(["tau_close"]) != b.tunables_digest(["tau_close"])
    # a digest over unrelated tunables is unaffected
    assert a.tunables_digest(["min_per_class"]) == b.tunables_digest(["min_per_class"])


def test_relative_paths_resolve_against_config_dir(tmp_path):
    config = load_config(write_config(tmp_path, minimal_payload()))
    assert config.splits["train"] == str(tmp_path / "train.jsonl")
