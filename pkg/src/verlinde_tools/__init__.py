"""Verlinde-formula fusion rules and finite-matrix identity checks for rational CFT modular data."""

__version__ = "0.1.0"
