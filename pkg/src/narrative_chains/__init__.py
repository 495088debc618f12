"""Causal pair extraction from dated news corpora, temporal chaining by
expression similarity, and decay-weighted monthly narrative indices."""

__version__ = "0.1.0"
