"""Finite-level arithmetic quandles and reconstruction of their arithmetic."""

__version__ = "0.1.0"
