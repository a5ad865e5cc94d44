"""Conditioned resample-mutate map on the phenotype simplex.

One step of the discrete-time dynamics replaces the whole population:
resample each site by its fitness (pi_x -> pi_x V_x), mutate, and normalize.
Two fitness variants are supported,

    V1_x = max(0, 1 - (C*pi)_x / K_x)        V2_x = K_x / (C*pi)_x,

both zero wherever K_x = 0.  The rectangular special case (K a plateau of
half-width L-1, C a window of half-width M) admits closed-form stationarity
facts that the tests lean on.

Symmetry is preserved bitwise: convolutions for x < 0 reuse the x >= 0
matrix rows against the reversed state, so mirrored inputs see mirrored
floating-point operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pairpop.errors import (
    BadKernel,
    DimensionMismatch,
    DivisionByZeroSupport,
    NoConvergence,
    ZeroTotalFitness,
)
from pairpop.measures import SimplexMeasure


@dataclass(frozen=True)
class DDParams:
    L: int
    K: np.ndarray  # on [-L, L]
    C: np.ndarray  # on offsets [-2L, 2L], symmetric, >= 0
    fitness_variant: str = "V2"  # "V1" | "V2"
    mu: float | None = None  # one-step mutation weight
    A: np.ndarray | None = None  # explicit stochastic matrix, rows sum to 1
    rect_M: int | None = None  # set in rectangular mode

    def __init__(self, L, K, C, fitness_variant="V2", mu=None, A=None, rect_M=None):
        K = np.asarray(K, float)
        C = np.asarray(C, float)
        if K.shape != (2 * L + 1,):
            raise DimensionMismatch(f"K must have length {2 * L + 1}")
        if C.shape != (4 * L + 1,):
            raise DimensionMismatch(f"C must have length {4 * L + 1} (offsets)")
        if np.any(C < 0):
            raise BadKernel("C entries must be >= 0")
        if not np.array_equal(C, C[::-1]):
            raise BadKernel("C must be symmetric")
        if fitness_variant not in ("V1", "V2"):
            raise ValueError("fitness_variant must be V1 or V2")
        if A is not None:
            A = np.asarray(A, float)
            if A.shape != (2 * L + 1, 2 * L + 1):
                raise DimensionMismatch("A must be (2L+1) x (2L+1)")
            if not np.allclose(A.sum(axis=1), 1.0, atol=1e-12):
                raise BadKernel("A rows must sum to 1")
        if mu is not None and A is not None:
            raise ValueError("give mu or A, not both")
        object.__setattr__(self, "L", int(L))
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "fitness_variant", fitness_variant)
        object.__setattr__(self, "mu", None if mu is None else float(mu))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rect_M", None if rect_M is None else int(rect_M))
        # rows of C[x-z] for x = 0..L only; x < 0 reuses them mirrored
        idx = np.arange(2 * L + 1)
        rows = np.empty((L + 1, 2 * L + 1))
        for x in range(L + 1):
            rows[x] = C[(x + L - idx) + 2 * L]
        rows.setflags(write=False)
        object.__setattr__(self, "_crows", rows)

    @staticmethod
    def rectangular(L: int, M: int, mu=None, A=None) -> "DDParams":
        """K_x = 1{|x| <= L-1}, C_x = 1{|x| <= M}; M even, L-1 <= M < 2(L-1)."""
        if M % 2 != 0:
            raise BadKernel(f"rectangular mode needs even M, got {M}")
        if not L - 1 <= M < 2 * (L - 1):
            raise BadKernel(f"rectangular mode needs L-1 <= M < 2(L-1), got L={L}, M={M}")
        xs = np.arange(-L, L + 1)
        off = np.arange(-2 * L, 2 * L + 1)
        K = (np.abs(xs) <= L - 1).astype(float)
        C = (np.abs(off) <= M).astype(float)
        return DDParams(L, K, C, fitness_variant="V2", mu=mu, A=A, rect_M=M)

    @property
    def n(self) -> int:
        return 2 * self.L + 1

    @property
    def rect_l(self) -> int:
        if self.rect_M is None:
            raise BadKernel("not in rectangular mode")
        return self.rect_M - self.L + 1

    def competition(self, v: np.ndarray) -> np.ndarray:
        """(C*pi)_x with mirror-stable summation, see module docstring.

        The x < 0 rows reuse the x > 0 matrix against a contiguous copy of
        the reversed state: for symmetric inputs both dot products see
        bitwise-identical operands and the same code path.
        """
        L = self.L
        vr = np.ascontiguousarray(v[::-1])
        s = np.empty(self.n)
        s[L:] = self._crows @ v
        s[:L] = (self._crows @ vr)[1:][::-1]
        return s


def _values(pi) -> np.ndarray:
    return pi.values if isinstance(pi, SimplexMeasure) else np.asarray(pi, float)


def dd_fitness(pi, p: DDParams) -> np.ndarray:
    v = _values(pi)
    if v.shape != (p.n,):
        raise DimensionMismatch(f"measure has length {v.size}, params need {p.n}")
    comp = p.competition(v)
    out = np.zeros(p.n)
    sup = p.K > 0
    if p.fitness_variant == "V1":
        out[sup] = np.maximum(0.0, 1.0 - comp[sup] / p.K[sup])
    else:
        if np.any(comp[sup] == 0):
            raise DivisionByZeroSupport(
                "supported site has zero competition mass under V2"
            )
        out[sup] = p.K[sup] / comp[sup]
    return out


def _mutate(p: DDParams, w: np.ndarray) -> np.ndarray:
    if p.A is not None:
        return p.A.T @ w
    if p.mu is None or p.mu == 0.0:
        return w
    mu = p.mu
    out = (1.0 - 2.0 * mu) * w
    # neighbour pair first: IEEE addition is commutative, so mirrored sites
    # add the same floats in commuted order and agree bitwise
    out[1:-1] += mu * w[:-2] + mu * w[2:]
    out[0] += mu * w[1]
    out[-1] += mu * w[-2]
    return out


def dd_step(pi, p: DDParams, return_vbar: bool = False):
    """One resample -> mutate -> normalize sweep.

    Normalize-then-mutate gives the same map for stochastic A (tested), but
    this composition order is the one fixed here.
    """
    v = _values(pi)
    V = dd_fitness(v, p)
    resampled = v * V
    vbar = float(resampled.sum())
    if vbar == 0.0:
        raise ZeroTotalFitness("no viable parent: sum_x pi_x V_x = 0")
    mutated = _mutate(p, resampled)
    out = mutated / mutated.sum()
    if return_vbar:
        return out, vbar
    return out


def dd_step_stochastic(pi, p: DDParams, N: int, rng) -> np.ndarray:
    """N-particle version of the map, for qualitative runs only.

    Each of N new individuals picks a parent with probability proportional
    to pi_x V_x and then mutates; the deterministic map is its N -> infinity
    limit and is what every quantitative gate uses.
    """
    v = _values(pi)
    V = dd_fitness(v, p)
    weights = v * V
    total = weights.sum()
    if total == 0.0:
        raise ZeroTotalFitness("no viable parent: sum_x pi_x V_x = 0")
    counts = rng.multinomial(N, weights / total)
    if p.A is not None:
        out = np.zeros(p.n, dtype=np.int64)
        for x in range(p.n):
            if counts[x]:
                out += rng.multinomial(counts[x], p.A[x])
        counts = out
    elif p.mu:
        out = np.zeros(p.n, dtype=np.int64)
        for x in range(p.n):
            if not counts[x]:
                continue
            left, stay, right = rng.multinomial(
                counts[x], [p.mu, 1.0 - 2.0 * p.mu, p.mu]
            )
            out[x] += stay
            if x > 0:
                out[x - 1] += left
            if x < p.n - 1:
                out[x + 1] += right
        # mutation off the grid removes the individual; resample the gap
        short = N - out.sum()
        if short:
            out += rng.multinomial(short, weights / total)
        counts = out
    return counts / counts.sum()


@dataclass(frozen=True)
class DDStationaryResult:
    measure: SimplexMeasure
    iterations: int
    residual: float
    vbar: float


def dd_stationary(
    p: DDParams, init, max_iter: int = 2_000_000, tol: float = 1e-12
) -> DDStationaryResult:
    """Fixed-point iteration of dd_step to sup-norm residual < tol."""
    v = _values(init).copy()
    v = v / v.sum()
    resid = np.inf
    for it in range(1, max_iter + 1):
        new, vbar = dd_step(v, p, return_vbar=True)
        resid = float(np.max(np.abs(new - v)))
        v = new
        if resid < tol:
            return DDStationaryResult(SimplexMeasure(v), it, resid, vbar)
    raise NoConvergence(
        f"dd_stationary residual {resid:.3e} after {max_iter} iterations",
        best=SimplexMeasure(v),
        residual=resid,
        iterations=max_iter,
    )


def middle_mass(nu, p: DDParams) -> float:
    """nu([-M/2, M/2]) in rectangular mode."""
    v = _values(nu)
    half = p.rect_M // 2
    return float(v[p.L - half : p.L + half + 1].sum())


def recurrence_roots(mu: float, vbar: float):
    """Roots of mu + (1 - 2 mu - vbar) r + mu r^2 = 0.

    Real branch returns ("real", (beta, 1/beta)) with beta >= 1/beta; the
    complex branch returns ("complex", (gamma, theta)) in modulus/angle form.
    Both roots always multiply to 1.
    """
    if mu <= 0:
        raise ValueError("need mu > 0")
    alpha = vbar - 1.0
    disc = alpha * (alpha + 4.0 * mu)
    if disc >= 0:
        root = np.sqrt(disc)
        b1 = (2.0 * mu + alpha + root) / (2.0 * mu)
        b2 = (2.0 * mu + alpha - root) / (2.0 * mu)
        if abs(b1) >= abs(b2):
            return "real", (b1, b2)
        return "real", (b2, b1)
    gamma = 1.0  # |roots|^2 = product = mu/mu
    tan_theta = np.sqrt(-disc) / abs(alpha + 2.0 * mu)
    return "complex", (gamma, float(np.arctan(tan_theta)))
