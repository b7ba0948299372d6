"""Wavelet-domain conditional diffusion for image restoration."""

__version__ = "0.1.0"
