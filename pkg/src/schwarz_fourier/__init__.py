"""Fourier-based analysis of alternating Schwarz methods on two overlapping discs."""

__version__ = "0.1.0"
