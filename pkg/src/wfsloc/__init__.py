"""Finite-scale localization of a category with respect to a weak factorization system."""

__version__ = "0.1.0"
