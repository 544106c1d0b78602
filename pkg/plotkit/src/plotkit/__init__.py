"""Figure scripts for the placement simulator's CSV/JSON artifacts."""

from .figures import (
    FigureSpec,
    heatmap_matrix,
    plot_coverage,
    plot_heatmap,
    plot_solutions,
    plot_sweep,
)
from .schema import SchemaError

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "SchemaError",
    "heatmap_matrix",
    "plot_coverage",
    "plot_heatmap",
    "plot_solutions",
    "plot_sweep",
]
