"""Fairness-aware tabular data augmentation with conditional GANs."""

__version__ = "0.1.0"
