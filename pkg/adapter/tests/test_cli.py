import json

from click.testing import CliRunner

from errorscope_adapter.cli import main

from conftest import toy_dataset


def write_dataset(directory, dataset):
    directory.mkdir(parents=True, exist_ok=True)
    for split, rows in dataset.items():
        with open(directory / f"{split}.jsonl", "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")


def test_export_command(tmp_path):
    data_dir = tmp_path / "data"
    write_dataset(data_dir, toy_dataset(n_train=8, n_eval=5))
    out_dir = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(
        main,
        [
            "export",
            "--dataset", str(data_dir),
            "--model", "stub",
            "--out", str(out_dir),
            "--seed", "7",
            "--mc-samples", "4",
        ],
    )
    assert result.exit_code == 0, result.output
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["mc_samples"] == 4
    assert (out_dir / "config.yaml").exists()
    assert "predictions:eval" in manifest["files"]


def test_export_rejects_unknown_label(tmp_path):
    data_dir = tmp_path / "data"
    write_dataset(
        data_dir,
        {"train": [{"id": 0, "text": "hi", "label": "mystery"}], "eval": []},
    )
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["export", "--dataset", str(data_dir), "--model", "stub", "--out", str(tmp_path / "o")],
    )
    assert result.exit_code != 0
