"""Toolkit for rank-one Kraus decompositions of entanglement breaking channels."""

__version__ = "0.1.0"
