"""Exact holonomic-function toolkit for proving special-function identities."""

__version__ = "0.1.0"
