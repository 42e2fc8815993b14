"""Numerical simulator and analytic calculator for the Schrodinger-Debye system."""

__version__ = "0.1.0"
