"""Viscoplastic material-point simulation and Bayesian parameter identification."""

__version__ = "0.1.0"
