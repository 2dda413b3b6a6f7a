"""Quantum-noise simulation and closed-form predictions for cross-correlation heterodyne detectors."""

__version__ = "0.1.0"
