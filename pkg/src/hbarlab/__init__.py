"""Numerical laboratory for exploded groupoids, their quantizations and admissible Planck values."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import HbarlabError

__all__ = ["HbarlabError", "__version__"]
