"""Probability measures on the phenotype grid and their fitness functionals.

The phenotype space is E = [-L, L] ∩ Z.  A population state is a probability
vector on E; fitness of a site couples a carrying capacity K with a
cooperation kernel B through m_x = K_x * sum_z B_{x-z} K_z pi_z.  Everything
here is pure and immutable, so states can be shared freely across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from pairpop.errors import (
    BadKernel,
    DimensionMismatch,
    NonInteriorMeasure,
    PairpopError,
)

SIMPLEX_CONSTRUCT_TOL = 1e-9


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SimplexMeasure:
    """Probability vector indexed by x in [-L, L] ∩ Z.

    Inputs whose mass deviates from 1 by at most 1e-9 are renormalized
    (absorbs file round-trip noise); larger deviations are rejected.
    """

    values: np.ndarray

    def __init__(self, values):
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size % 2 == 0:
            raise DimensionMismatch(
                f"need an odd-length 1-d vector, got shape {vals.shape}"
            )
        if np.any(vals < 0):
            raise PairpopError("negative mass in measure")
        total = float(vals.sum())
        if abs(total - 1.0) > SIMPLEX_CONSTRUCT_TOL:
            raise PairpopError(f"mass {total!r} is not 1 within 1e-9")
        object.__setattr__(self, "values", _frozen(vals / total))

    @property
    def L(self) -> int:
        return (self.values.size - 1) // 2

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    def __getitem__(self, x: int) -> float:
        return float(self.values[x + self.L])

    def is_interior(self) -> bool:
        return bool(np.all(self.values > 0))

    def mirrored(self) -> "SimplexMeasure":
        return SimplexMeasure(self.values[::-1])

    @staticmethod
    def uniform(L: int) -> "SimplexMeasure":
        return SimplexMeasure(np.full(2 * L + 1, 1.0 / (2 * L + 1)))

    @staticmethod
    def delta(L: int, x: int = 0) -> "SimplexMeasure":
        v = np.zeros(2 * L + 1)
        v[x + L] = 1.0
        return SimplexMeasure(v)

    def to_csv(self) -> str:
        """Serialize as `x, pi_x` rows under a `# simplex L=<L>` header."""
        buf = io.StringIO()
        buf.write(f"# simplex L={self.L}\n")
        buf.write("x,pi_x\n")
        for x, v in zip(self.sites, self.values):
            buf.write(f"{x},{float(v)!r}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "SimplexMeasure":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# simplex L="):
            raise PairpopError("missing `# simplex L=<L>` header")
        L = int(lines[0].split("=", 1)[1])
        vals = np.zeros(2 * L + 1)
        for ln in lines[1:]:
            if ln.startswith("#") or ln.startswith("x,"):
                continue
            xs, vs = ln.split(",")
            vals[int(xs) + L] = float(vs)
        return SimplexMeasure(vals)


def threshold_kernel(L: int, b: float, M: int) -> np.ndarray:
    """Expand B_x = b + (1-b)*1{|x| >= M} to an explicit vector on [-2L, 2L]."""
    if not 0.0 <= b <= 1.0:
        raise BadKernel(f"b={b} outside [0, 1]")
    if not L < M <= 2 * L:
        raise BadKernel(f"threshold kernel needs L < M <= 2L, got L={L}, M={M}")
    off = np.arange(-2 * L, 2 * L + 1)
    return b + (1.0 - b) * (np.abs(off) >= M)


@dataclass(frozen=True)
class FitnessParams:
    """Carrying capacity, cooperation kernel and mutation rate on E.

    The kernel is stored as one explicit B vector on offsets [-2L, 2L]
    regardless of how it was supplied, so all code paths share a single
    representation.  A threshold kernel keeps its (b, M) for the closed-form
    constants that need them.
    """

    L: int
    K: np.ndarray
    B: np.ndarray
    mu: float
    symmetric: bool = True
    b: float | None = None
    M: int | None = None

    def __init__(self, L, K, *, B=None, b=None, M=None, mu=0.0, symmetric=True):
        K = np.asarray(K, dtype=float)
        if K.shape != (2 * L + 1,):
            raise DimensionMismatch(f"K must have length {2 * L + 1}")
        if np.any(K <= 0) or np.any(K > 1):
            raise PairpopError("K values must lie in (0, 1]")
        if B is None:
            if b is None or M is None:
                raise BadKernel("give either an explicit B or (b, M)")
            B = threshold_kernel(L, b, M)
        else:
            B = np.asarray(B, dtype=float)
            if B.shape != (4 * L + 1,):
                raise DimensionMismatch(f"B must have length {4 * L + 1}")
        if np.any(B < 0) or np.any(B > 1):
            raise BadKernel("B entries must lie in [0, 1]")
        if not np.allclose(B, B[::-1], atol=0, rtol=0):
            raise BadKernel("B must be symmetric")
        if mu < 0:
            raise PairpopError("mu must be >= 0")
        if symmetric:
            if not np.array_equal(K, K[::-1]):
                raise PairpopError("symmetric model requires K_x = K_{-x}")
            if K[L] != 1.0:
                raise PairpopError("symmetric model requires K_0 = 1")
        object.__setattr__(self, "L", int(L))
        object.__setattr__(self, "K", _frozen(K))
        object.__setattr__(self, "B", _frozen(B))
        object.__setattr__(self, "mu", float(mu))
        object.__setattr__(self, "symmetric", bool(symmetric))
        object.__setattr__(self, "b", None if b is None else float(b))
        object.__setattr__(self, "M", None if M is None else int(M))

    @property
    def n(self) -> int:
        return 2 * self.L + 1

    def K_at(self, x: int) -> float:
        return float(self.K[x + self.L])

    def B_at(self, off: int) -> float:
        return float(self.B[off + 2 * self.L])

    def bmat(self) -> np.ndarray:
        """Dense matrix B[x-z] for x, z in E."""
        n = self.n
        idx = np.arange(n)
        return self.B[(idx[:, None] - idx[None, :]) + 2 * self.L]


def _values(pi) -> np.ndarray:
    return pi.values if isinstance(pi, SimplexMeasure) else np.asarray(pi, float)


def fitness_vector(pi, p: FitnessParams) -> np.ndarray:
    """m_x = K_x sum_z B_{x-z} K_z pi_z, entrywise in [0, 1]."""
    v = _values(pi)
    if v.shape != (p.n,):
        raise DimensionMismatch(f"measure has length {v.size}, params need {p.n}")
    return p.K * (p.bmat() @ (p.K * v))


def mean_fitness(pi, p: FitnessParams) -> float:
    v = _values(pi)
    return float(v @ fitness_vector(v, p))


def psi(pi, p: FitnessParams) -> float:
    """Half the rate of change of mean fitness along the selection-mutation flow.

    psi = sum_x pi_x (m_x - mbar)^2 + mu (2L+1) sum_x m_x (1/(2L+1) - pi_x).
    """
    v = _values(pi)
    m = fitness_vector(v, p)
    mbar = float(v @ m)
    n = p.n
    return float(v @ (m - mbar) ** 2 + p.mu * n * (m @ (1.0 / n - v)))


def lyapunov_value(pi, p: FitnessParams) -> float:
    """V = mbar/2 + mu * sum_x log pi_x, defined on the open simplex."""
    v = _values(pi)
    if np.any(v <= 0):
        raise NonInteriorMeasure("lyapunov value needs all pi_x > 0")
    return 0.5 * mean_fitness(v, p) + p.mu * float(np.log(v).sum())


@dataclass(frozen=True)
class SpeciationConstants:
    """Closed-form constants used by the stationarity and invariant-set gates.

    All formulas are minima of explicit positive expressions in K, L, l and
    (where applicable) b; each field reproduces its defining min exactly.
    ``mu_max_a1``/``mu_max_a2`` are the strict upper bounds on mu under which
    the delta-like and bimodal sets are invariant.
    """

    L: int
    l: int
    k: float
    c1: float
    delta2: float
    eps1: float | None = None
    c2: float | None = None
    eps2: float | None = None
    eps3: float | None = None
    p: int | None = None
    mu_max_a1: float | None = None
    mu_max_a2: float | None = None
    b: float | None = None
    extras: dict = field(default_factory=dict)

    def delta1(self, mu: float) -> float:
        KL = self.extras["K_L"]
        return mu**2 * KL**2 / (16.0 * (2 * self.L + 2) ** 2)

    def in_region_r1(self, mu: float, b: float) -> bool:
        KL, Ll = self.extras["K_L"], self.L - self.l
        cap = min(4 * mu * KL**2 * Ll, KL**2 * Ll / (4.0 * (2 * self.L + 1) ** 3))
        return 0 <= b <= cap

    def in_region_r(self, mu: float, b: float) -> bool:
        KL, Ll = self.extras["K_L"], self.L - self.l
        cap = min(
            4 * mu * KL**2 * Ll,
            self.c1 / 2.0,
            KL**2 * Ll / (4.0 * (2 * self.L + 1) ** 3),
        )
        return 0 <= b <= cap
