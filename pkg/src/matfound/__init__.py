"""Exact matroid and pasture computations: gluing constructions, modular
representation systems and their censuses."""

__version__ = "0.1.0"
