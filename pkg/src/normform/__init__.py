"""Norm-form equation solver over totally complex Galois number fields."""

__version__ = "0.1.0"
