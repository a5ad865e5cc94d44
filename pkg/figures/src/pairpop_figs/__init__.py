"""Paper-style figures from pairpop CSV outputs.

Strictly read-only over the CSVs: no model math is recomputed here, and
every render writes a JSON sidecar with per-series extrema (plus
zero-crossings or marker coordinates where meaningful) so figures stay
scriptable without image diffing.
"""

__version__ = "0.1.0"

from pairpop_figs.render import FigureSpec, SchemaMismatch, render

__all__ = ["FigureSpec", "SchemaMismatch", "render", "__version__"]
