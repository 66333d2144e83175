"""Steady and quasiperiodic Euler flows near shear flows on the periodic channel."""

__version__ = "0.1.0"
