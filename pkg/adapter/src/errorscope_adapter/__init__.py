"""Exporter producing errorscope engine artifacts from text-classification
pipelines: predictions, perturbed-text predictions under the shared PRNG
contract, embeddings, saliency, syntax flags, and MC sample tables."""

from .export import ExportManifest, export_all, load_dataset_dir
from .perturbations import generate_variants
from .pipelines import StubPipeline, load_pipeline

__version__ = "0.1.0"

__all__ = [
    "ExportManifest",
    "StubPipeline",
    "export_all",
    "generate_variants",
    "load_dataset_dir",
    "load_pipeline",
    "__version__",
]
