"""Render the experiment figure set from harness CSV output."""

from .figures import FIGURE_IDS, SchemaError, build_figure, read_rows, render

__all__ = ["FIGURE_IDS", "SchemaError", "build_figure", "read_rows", "render"]

__version__ = "0.1.0"
