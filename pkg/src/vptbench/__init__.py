"""Procedural visuospatial perspective-taking benchmarks for multimodal models."""

__version__ = "0.1.0"
