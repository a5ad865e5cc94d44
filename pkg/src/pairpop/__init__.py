"""pairpop: two-sex lattice branching populations and speciation dynamics.

Two model families live here.  The lattice side (``lattice``, ``perc``,
``pde``) simulates a two-nest-per-site birth/death particle system, its
oriented-percolation comparison, and the reaction-diffusion limits obtained
under rapid stirring.  The simplex side (``measures``, ``selmut``, ``ddmap``,
``moran``) covers selection-mutation flow on a phenotype grid, a conditioned
resample-mutate map, and the finite-population Moran engines whose limits
those are.
"""

__version__ = "0.1.0"

from pairpop import errors

__all__ = ["errors", "__version__"]
