"""Finite-dimensional computations for operator algebras on L^p spaces."""

__version__ = "0.1.0"
