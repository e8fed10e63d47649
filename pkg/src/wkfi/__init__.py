"""Numerical laboratory for the exponentially weighted Ky Fan inequality."""

__version__ = "0.1.0"
