"""Representations of quivers with multiplicities over finite fields and the rationals."""

from __future__ import annotations

__version__ = "0.1.0"
