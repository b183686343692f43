"""Differential static-analysis issue labeling and false-positive reduction."""

__version__ = "0.1.0"
