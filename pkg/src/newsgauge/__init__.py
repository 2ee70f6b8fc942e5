"""News article extraction, featurization, labeling, and classification pipeline."""

__version__ = "0.1.0"
