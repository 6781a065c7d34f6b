"""Exact Hecke eigenvalues, linear-form sieves and ordered-run construction."""
__version__ = "0.1.0"
