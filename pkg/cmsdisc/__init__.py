"""Chebyshev-Markov-Stieltjes discrepancy bounds against the arcsine and
semicircle laws, with Monte-Carlo checks of the Wigner-law error estimate."""

__version__ = "0.1.0"
