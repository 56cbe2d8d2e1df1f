"""Workbench for cohesive powers of computable linear orders."""

from __future__ import annotations

from .cohesive import Horizon, Verdict

__all__ = ["Horizon", "Verdict", "__version__"]
__version__ = "0.1.0"
