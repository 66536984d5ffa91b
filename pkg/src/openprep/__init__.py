"""Simulate state-preparation procedures on correlated system/environment states."""

__version__ = "0.1.0"
