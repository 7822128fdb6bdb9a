"""Fronts of constant harmonic-mean curvature one in hyperbolic 3-space."""

__version__ = "0.1.0"
