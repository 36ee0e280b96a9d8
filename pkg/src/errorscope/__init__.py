"""Error-analysis engine for text classification.

Ingests dataset splits and model prediction artifacts from files, computes
dataset-quality warnings, metrics, and rule-based smart tags over data
subpopulations, and serves them through an HTTP API, a CLI report path,
and this library surface.
"""

from .config import ProjectConfig, Thresholds, load_config
from .engine import AnalysisEngine
from .ingestion import ProjectState, load_artifacts, validate_artifacts
from .scheduler import AnalysisScheduler, TaskKey
from .tagging import ALL_TAGS, TAG_FAMILIES, ActionStore, FilterSpec

__version__ = "0.1.0"

__all__ = [
    "ALL_TAGS",
    "ActionStore",
    "AnalysisEngine",
    "AnalysisScheduler",
    "FilterSpec",
    "ProjectConfig",
    "ProjectState",
    "TAG_FAMILIES",
    "TaskKey",
    "Thresholds",
    "load_artifacts",
    "load_config",
    "validate_artifacts",
    "__version__",
]
