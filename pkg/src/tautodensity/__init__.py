"""Exact and asymptotic densities of semantic classes of implicational formulae."""

__version__ = "0.1.0"
