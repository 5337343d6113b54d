"""Toolkit for the SyGuS input format: reader, front end, checkers, a
baseline enumerative solver and the oracle protocol."""

__version__ = "0.1.0"
