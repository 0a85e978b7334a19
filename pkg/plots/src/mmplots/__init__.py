"""Figure rendering for mmgame experiment CSVs."""

from .figures import FIGURE_KINDS, FigureSpec, RenderError, RenderResult, render

__version__ = "0.1.0"
