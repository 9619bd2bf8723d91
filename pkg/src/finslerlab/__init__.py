"""Numerical workbench for Finsler metric-measure geometry.

Forward-mode jets feed exact fiber/position derivatives of a metric's squared
norm into curvature and measure-derivative assemblies; geodesic polar fields
sample volume densities along radial sprays; comparison and spectral modules
check integral curvature-bound inequalities against those fields.
"""
from __future__ import annotations

__version__ = "0.1.0"
