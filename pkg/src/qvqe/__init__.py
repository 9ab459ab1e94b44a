"""Adaptive operator-block VQE workbench with exact-diagonalization oracles."""

__version__ = "0.1.0"
