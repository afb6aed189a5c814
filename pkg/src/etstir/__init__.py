"""Electrothermal stirring of a microcantilever binding assay in 2-D."""

__version__ = "0.1.0"
