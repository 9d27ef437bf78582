"""Offline safe-set design and a runtime supervisor for a lab cart."""

__version__ = "0.1.0"
