"""Definite C+ action descriptions: parsing, grounding, query evaluation, and a bundled
dynamic resource-sharing protocol with run-time specification change."""

__version__ = "0.1.0"
