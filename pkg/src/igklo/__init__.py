"""Exact construction and verification of iGKLO representations of shifted iYangians."""

__version__ = "0.1.0"
