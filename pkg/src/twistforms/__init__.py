"""Exact twisted forms of current Lie algebras over Laurent Kummer extensions."""

__version__ = "0.1.0"
