"""Exact computation of Wiles defects and related commutative-algebra invariants."""

__version__ = "0.1.0"
