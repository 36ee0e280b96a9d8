"""Optional end-to-end smoke against a public intent-classification
checkpoint.  Requires model-hub access and several minutes of inference,
so it only runs when ERRORSCOPE_E2E_MODEL is set (for example to a local
path or hub id of a DistilBERT-class intent model) together with
ERRORSCOPE_E2E_DATASET pointing at a directory of split JSONL files."""

import csv
import math
import os
import subprocess
import sys

import pytest

MODEL = os.environ.get("ERRORSCOPE_E2E_MODEL")
DATASET = os.environ.get("ERRORSCOPE_E2E_DATASET")


@pytest.mark.skipif(
    not (MODEL and DATASET),
    reason="set ERRORSCOPE_E2E_MODEL and ERRORSCOPE_E2E_DATASET to run the case-study smoke",
)
def test_case_study_accuracy_and_calibration(tmp_path):
    from errorscope_adapter.export import export_all, load_dataset_dir
    from errorscope_adapter.pipelines import load_pipeline

    dataset = load_dataset_dir(DATASET)
    pipeline = load_pipeline(f"hf:{MODEL}")
    out = tmp_path / "export"
    export_all(dataset, pipeline, out, seed=42, dataset_name="case-study")

    result = subprocess.run(
        [sys.executable, "-m", "errorscope.cli", "report", str(out / "config.yaml"),
         "--out", str(tmp_path / "report"), "--split", "eval"],
        capture_output=True, text=True, timeout=3600,
    )
    assert result.returncode == 0, result.stdout + result.stderr
    with open(tmp_path / "report" / "metrics.csv") as fh:
        rows = {(r["split"], r["stage"]): r for r in csv.DictReader(fh)}
    raw = rows[("eval", "raw")]
    assert math.isclose(float(raw["accuracy"]), 0.939, abs_tol=0.005)
    assert math.isclose(float(raw["ece"]), 0.21, abs_tol=0.02)
