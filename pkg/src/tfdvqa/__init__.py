"""Variational thermofield-dynamics simulator."""

__version__ = "0.1.0"
