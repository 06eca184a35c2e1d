"""Deligne pairings, intersection connections and holomorphic torsion on moduli of rank-one local systems."""

__version__ = "0.1.0"
