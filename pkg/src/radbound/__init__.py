"""Numerical laboratory for local Rademacher complexity bounds built on covering numbers."""

__version__ = "0.1.0"
