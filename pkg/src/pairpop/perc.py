"""Oriented site percolation on the even sublattice of Z x Z+.

Sites (x, n) with x + n even carry open/closed marks; oriented edges run
from (x, n) to (x +- 1, n + 1).  A site (y, l) is reached from (x, m) when
some nearest-neighbour path is open at every level from m through l
inclusive, so the start site's own mark counts.  Wet fronts, Monte-Carlo
survival estimates and a brute-force enumeration oracle live here; grids can
also wrap the good-event block field produced by the lattice module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pairpop.errors import PairpopError, TooLarge


@dataclass(frozen=True)
class PercGrid:
    """omega[n, x+width] in {-1 (off parity), 0 (closed), 1 (open)}."""

    width: int
    height: int
    omega: np.ndarray
    gamma: float
    M: int = 0

    def is_open(self, x: int, n: int) -> bool:
        return abs(x) <= self.width and self.omega[n, x + self.width] == 1

    def dump(self) -> str:
        lines = [f"# perc gamma={self.gamma} M={self.M}"]
        for n in range(self.height):
            row = []
            for x in range(-self.width, self.width + 1):
                v = self.omega[n, x + self.width]
                row.append(" " if v < 0 else ("#" if v else "."))
            lines.append("".join(row))
        return "\n".join(lines) + "\n"


def parity_mask(width: int, height: int) -> np.ndarray:
    xs = np.arange(-width, width + 1)
    ns = np.arange(height)
    return ((xs[None, :] + ns[:, None]) % 2) == 0


def generate(
    gamma: float,
    width: int,
    height: int,
    mode: str = "independent",
    seed: int = 0,
    field=None,
    uniforms: np.ndarray | None = None,
) -> PercGrid:
    """Fresh grid: i.i.d. Bernoulli(1-gamma) marks, or a wrapped block field.

    ``uniforms`` (same shape as the grid) supports coupling across a gamma
    sweep: a site is open iff its uniform is >= gamma.
    """
    if mode == "from_field":
        if field is None:
            raise PairpopError("from_field mode needs a GoodEventField")
        return PercGrid(
            width=field.width,
            height=field.height,
            omega=field.omega.copy(),
            gamma=field.gamma_hat,
            M=2,
        )
    if not 0.0 <= gamma <= 1.0:
        raise PairpopError("gamma must lie in [0, 1]")
    if uniforms is None:
        rng = np.random.default_rng(seed)
        uniforms = rng.random((height, 2 * width + 1))
    omega = (uniforms >= gamma).astype(np.int8)
    omega[~parity_mask(width, height)] = -1
    return PercGrid(width, height, omega, gamma, M=0)


@dataclass(frozen=True)
class WetFront:
    n: int
    wet: frozenset


def evolve(grid: PercGrid, W0) -> list:
    """Exact wet fronts W_0 .. W_{height-1} from initial set W0 on level 0.

    The path rule checks openness at every level including the start, so
    W_0 = {x in W0 : omega(x, 0) = 1}.
    """
    wet = frozenset(
        x for x in W0 if x % 2 == 0 and grid.is_open(x, 0)
    )
    fronts = [WetFront(0, wet)]
    for n in range(1, grid.height):
        nxt = set()
        for x in fronts[-1].wet:
            for y in (x - 1, x + 1):
                if grid.is_open(y, n):
                    nxt.add(y)
        fronts.append(WetFront(n, frozenset(nxt)))
    return fronts


def _evolve_batch(open_mask: np.ndarray, w0: np.ndarray) -> np.ndarray:
    """Vectorized fronts: open_mask (trials, height, n_x), w0 (trials, n_x)."""
    wet = w0 & open_mask[:, 0, :]
    for n in range(1, open_mask.shape[1]):
        left = np.zeros_like(wet)
        right = np.zeros_like(wet)
        left[:, :-1] = wet[:, 1:]
        right[:, 1:] = wet[:, :-1]
        wet = (left | right) & open_mask[:, n, :]
    return wet


def survival_mc(
    gamma: float,
    width: int,
    n_levels: int,
    trials: int,
    seed: int = 0,
    p: float | None = None,
    W0=None,
    target: str = "origin",
    uniforms: np.ndarray | None = None,
):
    """Frequency estimate of a wet event at level n_levels, with normal CI.

    ``target="origin"`` estimates P(0 in W_{n_levels}) (n_levels must be
    even); ``"nonempty"`` estimates P(W_{n_levels} nonempty).  The initial
    wet set is Bernoulli(p) on even sites when p is given, else the fixed
    set W0.  Returns (estimate, stderr).
    """
    if target not in ("origin", "nonempty"):
        raise ValueError("target must be 'origin' or 'nonempty'")
    if target == "origin" and n_levels % 2 != 0:
        raise PairpopError("origin target needs even n_levels (parity)")
    height = n_levels + 1
    n_x = 2 * width + 1
    rng = np.random.default_rng(seed)
    if uniforms is None:
        uniforms = rng.random((trials, height, n_x))
    open_mask = uniforms >= gamma
    open_mask &= parity_mask(width, height)[None, :, :]
    w0 = np.zeros((trials, n_x), dtype=bool)
    xs = np.arange(-width, width + 1)
    if p is not None:
        w0[:, :] = rng.random((trials, n_x)) < p
        w0[:, xs % 2 != 0] = False
    elif W0 is not None:
        for x in W0:
            if abs(x) <= width and x % 2 == 0:
                w0[:, x + width] = True
    else:
        raise PairpopError("give p or W0")
    wet = _evolve_batch(open_mask, w0)
    if target == "origin":
        hits = wet[:, width]
    else:
        hits = wet.any(axis=1)
    est = float(hits.mean())
    se = math.sqrt(max(est * (1.0 - est), 1e-300) / trials)
    return est, se


def survival_exact(
    gamma: float,
    W0,
    width: int,
    n_levels: int,
    target: str = "nonempty",
) -> float:
    """Brute-force oracle: sum Bernoulli weights over every relevant field.

    Only sites forward-reachable from W0 (ignoring marks) can matter; their
    count must stay <= 25.
    """
    if target not in ("origin", "nonempty"):
        raise ValueError("target must be 'origin' or 'nonempty'")
    W0 = [x for x in W0 if x % 2 == 0 and abs(x) <= width]
    if not W0:
        return 0.0
    reach = [set(W0)]
    for n in range(1, n_levels + 1):
        nxt = set()
        for x in reach[-1]:
            for y in (x - 1, x + 1):
                if abs(y) <= width:
                    nxt.add(y)
        reach.append(nxt)
    sites = [(x, n) for n in range(n_levels + 1) for x in sorted(reach[n])]
    k = len(sites)
    if k > 25:
        raise TooLarge(f"{k} relevant sites exceeds the 25-site oracle cap")
    index = {s: i for i, s in enumerate(sites)}
    popen = 1.0 - gamma
    total = 0.0
    for mask in range(1 << k):
        wet = {x for x in W0 if mask >> index[(x, 0)] & 1}
        for n in range(1, n_levels + 1):
            wet = {
                y
                for x in wet
                for y in (x - 1, x + 1)
                if (y, n) in index and mask >> index[(y, n)] & 1
            }
            if not wet:
                break
        hit = (0 in wet) if target == "origin" else bool(wet)
        if not hit:
            continue
        nopen = bin(mask).count("1")
        total += popen**nopen * gamma ** (k - nopen)
    return total
