"""Gaussian Solovay-Kitaev compilation and energy-constrained discrimination bounds."""

__version__ = "0.1.0"
