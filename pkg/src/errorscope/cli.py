"""Command-line entry points: validate, serve, report, export-actions."""

from __future__ import annotations

import json
import sys

import click

from .config import load_config
from .engine import AnalysisEngine
from .ingestion import load_artifacts, validate_artifacts


def _build_engine(config_path: str) -> AnalysisEngine:
    config = load_config(config_path)
    state = load_artifacts(config)
    return AnalysisEngine(state)


@click.group()
def main():
    """Error analysis for text classification projects."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--as-json", "as_json", is_flag=True, help="Print the report as JSON.")
def validate(config_path: str, as_json: bool):
    """Load a project and run all artifact validations."""
    config = load_config(config_path)
    state = load_artifacts(config)
    report = validate_artifacts(state)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "ok": report.ok,
                    "issues": [
                        {
                            "file": issue.file,
                            "check": issue.check,
                            "utterance_id": issue.utterance_id,
                            "message": issue.message,
                        }
                        for issue in report.issues
                    ],
                }
            )
        )
    else:
        for issue in report.issues:
            click.echo(f"[{issue.check}] {issue.file} id={issue.utterance_id}: {issue.message}")
        click.echo("ok" if report.ok else f"{len(report.issues)} issue(s) found")
    if not report.ok:
        sys.exit(1)


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8091, show_default=True)
@click.option("--no-warm", is_flag=True, help="Skip eager startup computation.")
@click.option("--ui", "ui_dir", default=None, type=click.Path(exists=True),
              help="Directory of static UI files to serve at /.")
def serve(config_path: str, host: str, port: int, no_warm: bool, ui_dir: str | None):
    """Start the HTTP API (optionally hosting the browser UI)."""
    import threading

    import uvicorn

    from .service import create_app

    engine = _build_engine(config_path)
    if not no_warm:
        threading.Thread(target=engine.warm_startup, daemon=True).start()
    uvicorn.run(create_app(engine, ui_dir), host=host, port=port, log_level="info")


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--split", "splits", multiple=True, help="Restrict to these splits.")
def report(config_path: str, out_dir: str, splits: tuple[str, ...]):
    """Render figures and CSV summaries to a directory."""
    from .report import generate_report

    engine = _build_engine(config_path)
    written = generate_report(engine, out_dir, list(splits) or None)
    for path in written:
        click.echo(str(path))


@main.command("export-actions")
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(), help="CSV output file.")
def export_actions(config_path: str, out_path: str):
    """Export non-default proposed actions to CSV."""
    engine = _build_engine(config_path)
    count = engine.export_proposed_actions(out_path)
    click.echo(f"{count} action(s) written to {out_path}")


if __name__ == "__main__":
    main()
