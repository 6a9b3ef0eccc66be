"""Lipschitz subspaces of C(K) on finite bitopological models."""

__version__ = "0.1.0"
