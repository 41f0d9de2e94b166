"""Spectral integrability test and one-clean-qubit trace estimation."""

__version__ = "0.1.0"
