"""Numerical twin of a transmon characterization chain."""

__version__ = "0.1.0"
