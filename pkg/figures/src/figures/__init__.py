"""Render shallow-plan-lab campaign CSVs into figure-style charts."""

from .data import SCHEMAS, SchemaMismatch, fig1_series, fig2_series, fig3_series
from .render import FigureSpec, extract_series, render

__version__ = "0.1.0"
