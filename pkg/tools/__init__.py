"""Spectral analysis and matrix inequality checks."""
