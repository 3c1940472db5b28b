"""Model selection for individual treatment effect models."""

__version__ = "0.1.0"
