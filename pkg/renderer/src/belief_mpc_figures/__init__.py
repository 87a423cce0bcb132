"""Render publication figures from belief-mpc experiment result CSVs.

This package is a read-only consumer of the harness's summary files: it
validates their schemas, plots exactly the values they contain (never
recomputing statistics), and embeds an input checksum in each image so a
figure can always be traced back to the exact CSV bytes it was drawn
from.
"""

__version__ = "0.1.0"

from .figures import (FIGURE_IDS, FigureSpec, RenderReport, Style, make_spec,
                      render)
from .io import SchemaError, load_summary

__all__ = [
    "FIGURE_IDS", "FigureSpec", "RenderReport", "SchemaError", "Style",
    "load_summary", "make_spec", "render",
]
