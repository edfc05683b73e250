"""Exact and Monte Carlo laboratory for decoupling inequalities of vector-valued martingales."""

__version__ = "0.1.0"
