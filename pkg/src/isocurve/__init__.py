"""Exact chart-level computations for characteristic-p non-abelian Hodge theory."""

__version__ = "0.1.0"
