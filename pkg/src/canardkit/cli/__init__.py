"""Command-line interface: system files in, JSON / CSV / SVG reports out."""
from __future__ import annotations

from .main import build_parser, main, run

__all__ = ["build_parser", "main", "run"]
