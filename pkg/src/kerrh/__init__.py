"""Horizontal-structure tensor calculus on exact Kerr backgrounds."""

__version__ = "0.1.0"
