"""Survival of planar lattice walks that must avoid a half-line."""

__version__ = "0.1.0"
