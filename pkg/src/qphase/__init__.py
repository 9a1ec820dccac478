"""Quantum phase distributions: Pegg-Barnett, s-parametrized and Garrison-Wong."""
__version__ = "0.1.0"
