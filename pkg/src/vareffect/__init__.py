"""Reverse-engineer variability dependencies from preprocessor-based product lines."""

__version__ = "0.1.0"
