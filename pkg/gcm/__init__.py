"""Gaussian collision-model simulator: scrambling and non-Markovianity of beam-splitter networks."""

__version__ = "0.1.0"
