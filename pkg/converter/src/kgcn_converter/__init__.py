"""Planetoid-style citation dataset to portable container converter."""

from .convert import ConversionError, assemble, convert, read_upstream

__version__ = "0.1.0"
