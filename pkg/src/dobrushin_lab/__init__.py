"""Concentration bounds under the Dobrushin condition, with exact and Monte Carlo checks."""

__version__ = "0.1.0"
