"""Electricity theft detection with an under-bagged ensemble of 1-D CNNs."""

__version__ = "0.1.0"
