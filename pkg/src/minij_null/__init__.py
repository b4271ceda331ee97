"""Null-safety checker for the MiniJ language."""

__version__ = "0.1.0"
