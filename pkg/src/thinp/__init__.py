"""Finite p-groups from pc presentations, and certified non-inner automorphisms of order p."""

from .pcgroup import Group, PcPresentation, parse_presentation

__all__ = ["Group", "PcPresentation", "parse_presentation"]
__version__ = "0.1.0"
