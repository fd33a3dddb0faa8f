"""Numerical laboratory for the normalized Ricci-DeTurck flow near a hyperbolic cusp."""

__version__ = "0.1.0"
