"""Rough statistical convergence in partial metric spaces, on finite prefixes."""

__version__ = "0.1.0"
