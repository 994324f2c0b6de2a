"""Besov regularity and adaptive approximation tools for polyhedral cones."""

__version__ = "0.1.0"
