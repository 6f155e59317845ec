"""Elliptic-logarithm resolution of integral points on two families of
binomial near-collision equations."""

__version__ = "0.1.0"
