"""Smallest eigenvalues of moment Hankel matrices for w(x) = exp(-x**beta) in fixed point."""

__version__ = "0.1.0"
