"""Eco-MDO sizing of a solar HALE drone wing."""

__version__ = "0.1.0"
