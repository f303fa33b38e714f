"""Quantum reservoir GAN: a density-matrix reservoir generator trained adversarially."""

__version__ = "0.1.0"
