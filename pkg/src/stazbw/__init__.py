"""Spacetime-algebra simulator for the Barut-Zanghi spinning electron."""

__version__ = "0.1.0"
