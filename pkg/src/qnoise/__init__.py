"""Quantum neural network classifiers and their robustness to single-qubit noise."""

__version__ = "0.1.0"
