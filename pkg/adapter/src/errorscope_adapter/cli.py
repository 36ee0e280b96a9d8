"""Export CLI: writes every engine artifact for a dataset and pipeline."""

from __future__ import annotations

import click

from .export import DEFAULT_MC_SAMPLES, DEFAULT_TYPO_VARIANTS, export_all, load_dataset_dir
from .pipelines import load_pipeline


@click.group()
def main():
    """Artifact exporter for the errorscope analysis engine."""


@main.command()
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True),
              help="Directory of <split>.jsonl files ({id, text, label} records).")
@click.option("--model", "model_spec", required=True,
              help="Pipeline spec: 'module:attribute', 'hf:<model>', or 'stub'.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--mc-samples", default=DEFAULT_MC_SAMPLES, show_default=True, type=int)
@click.option("--typo-variants", default=DEFAULT_TYPO_VARIANTS, show_default=True, type=int)
@click.option("--threshold", default=0.5, show_default=True, type=float,
              help="Prediction threshold written into the exported config.")
@click.option("--rejection-class", default="oos", show_default=True)
@click.option("--name", "dataset_name", default="exported", show_default=True)
@click.option("--serve-provider", "provider_addr", default=None,
              help="After exporting, serve the pipeline at host:port using the remote-provider wire format.")
def export(
    dataset_dir,
    model_spec,
    out_dir,
    seed,
    mc_samples,
    typo_variants,
    threshold,
    rejection_class,
    dataset_name,
    provider_addr,
):
    """Export dataset splits, predictions, perturbed predictions,
    embeddings, saliency, syntax flags, and MC samples."""
    dataset = load_dataset_dir(dataset_dir)
    pipeline = load_pipeline(model_spec)
    manifest = export_all(
        dataset,
        pipeline,
        out_dir,
        seed=seed,
        dataset_name=dataset_name,
        mc_samples=mc_samples,
        n_typo_variants=typo_variants,
        prediction_threshold=threshold,
        rejection_class=rejection_class,
    )
    for role, info in sorted(manifest.files.items()):
        click.echo(f"{role}: {info['path']} ({info['rows']} rows)")
    click.echo(f"manifest: {out_dir}/manifest.json")

    if provider_addr:
        from .provider import serve_provider

        host, _, port = provider_addr.partition(":")
        click.echo(f"serving provider on {provider_addr}")
        serve_provider(pipeline, host or "127.0.0.1", int(port or "8765"))


if __name__ == "__main__":
    main()
