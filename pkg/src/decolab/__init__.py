"""Decoherence exponents, kernels and density-matrix evolution for open quantum systems."""

__version__ = "0.1.0"
