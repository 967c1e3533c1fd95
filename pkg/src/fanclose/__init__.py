"""Certified computations around D(-1)-triples {1, b, c} and their extensions."""

__version__ = "0.1.0"
