"""Continuous-time quantum walks, walk search and adiabatic evolution."""

from __future__ import annotations

__version__ = "0.1.0"
