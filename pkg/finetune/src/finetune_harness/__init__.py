"""Fine-tuning harness for the news quality classifier.

Consumes the bundle exported by the feature pipeline (articles, fold
assignments, manifest) and cross-validates a small transformer encoder
over the same folds, reporting metrics in the same shape.
"""

from .bundle import Bundle, BundleError, load_bundle
from .config import FinetuneConfig, FinetuneError
from .trainer import run_harness

__all__ = [
    "Bundle",
    "BundleError",
    "FinetuneConfig",
    "FinetuneError",
    "load_bundle",
    "run_harness",
]
