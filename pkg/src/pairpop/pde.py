"""Reaction-diffusion systems of the stirred lattice limits.

Five reaction families share one splitting integrator: the four-state
site-pair system, its three-state reduction, the monotone (u, v) system, the
two-floor pair system of individual stirring, and its symmetric scalar
reduction f(u) = -u + 2c(1-u)u^2.  Time stepping alternates pointwise RK4 of
the reaction with a sampled-Gaussian heat step (reflecting boundary), the
discrete form of the nonlinear Trotter product; both sub-flows are monotone,
which is what the ordering tests lean on.

The phase analysis of the (u, v) reaction field eta lives here too:
nullclines, the interior fixed points

    P+- = (1/2 + 1/c +- r, 1/2 - 1/c +- r),   r = sqrt(1/4 - 1/c),

their Jacobian classification, and the numerical checker for the
front-regeneration condition (density D1 on [-L, L] yields density d1 on
[-3L, 3L] by time T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pairpop.errors import (
    DegenerateAtC4,
    KernelTooWide,
    NoRealRoots,
    PairpopError,
    RegionEscape,
)

SYSTEMS = {
    "four_state": ("u00", "u01", "u10", "u11"),
    "three_state": ("u0", "u1", "u2"),
    "uv": ("u", "v"),
    "ind_pair": ("u1", "u2"),
    "scalar_sex": ("u",),
}

REGION_TOL = 1e-8
REGION_ABORT = 1e-6


@dataclass(frozen=True)
class ReactionSpec:
    system: str
    c: float

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")
        if self.c <= 0:
            raise PairpopError("c must be > 0")

    @property
    def components(self):
        return SYSTEMS[self.system]


def reaction_terms(spec: ReactionSpec, comps):
    """Reaction part of the chosen system; works on scalars or arrays."""
    c = spec.c
    s = spec.system
    if s == "four_state":
        u00, u01, u10, u11 = comps
        return (
            u01 + u10 - 2 * c * u00 * u11,
            u11 - u01 + c * (u00 - u01) * u11,
            u11 - u10 + c * (u00 - u10) * u11,
            -2 * u11 + c * (u01 + u10) * u11,
        )
    if s == "three_state":
        u0, u1, u2 = comps
        return (
            u1 - 2 * c * u0 * u2,
            2 * u2 - u1 + c * (2 * u0 - u1) * u2,
            -2 * u2 + c * u1 * u2,
        )
    if s == "uv":
        u, v = comps
        return ((2 * c * (1 - u) + 1) * v - u, (c * (u - v) - 2) * v)
    if s == "ind_pair":
        u1, u2 = comps
        return (
            -u1 + 2 * c * (1 - u1) * u1 * u2,
            -u2 + 2 * c * (1 - u2) * u1 * u2,
        )
    u = comps[0]
    return (-u + 2 * c * (1 - u) * u * u,)


def ode_field(spec: ReactionSpec, point) -> np.ndarray:
    vals = tuple(float(p) for p in point)
    if len(vals) != len(spec.components):
        raise PairpopError(
            f"{spec.system} needs {len(spec.components)} components"
        )
    return np.array(reaction_terms(spec, vals))


# ---------------------------------------------------------------------------
# (u, v) phase analysis


def uv_jacobian(c: float, u: float, v: float) -> np.ndarray:
    return np.array(
        [
            [-2 * c * v - 1.0, 2 * c * (1 - u) + 1.0],
            [c * v, c * u - 2 * c * v - 2.0],
        ]
    )


def nullclines(c: float, u):
    """gamma1: v with eta1 = 0; gamma2: v with eta2 = 0 (besides v = 0)."""
    u = np.asarray(u, float)
    return u / (1.0 + 2 * c - 2 * c * u), u - 2.0 / c


@dataclass(frozen=True)
class Equilibrium:
    point: tuple
    eigenvalues: tuple
    label: str


@dataclass(frozen=True)
class EquilibriaReport:
    c: float
    origin: Equilibrium
    has_interior: bool
    p_plus: Equilibrium | None = None
    p_minus: Equilibrium | None = None


def _classify(eigs, tol=1e-10) -> str:
    re = np.sort(np.real(eigs))
    if re[0] < -tol and re[-1] > tol:
        return "saddle"
    if re[-1] < -tol:
        return "stable"
    if re[0] > tol:
        return "unstable"
    return "degenerate"


def equilibria(c: float, system: str = "uv") -> EquilibriaReport:
    """Fixed points of the (u, v) reaction with Jacobian classification.

    For c > 4 the interior points P+ (stable) and P- (saddle) are distinct;
    at c = 4 they collide, which is reported as DegenerateAtC4.  The
    three-state family maps through (u, v) = (u1 + u2, u2).
    """
    if system not in ("uv", "three_state"):
        raise ValueError("equilibria are defined for the uv/three_state families")

    def make(u, v):
        eigs = tuple(np.linalg.eigvals(uv_jacobian(c, u, v)))
        pt = (u, v)
        if system == "three_state":
            pt = (1.0 - u, u - v, v)
        return Equilibrium(pt, eigs, _classify(eigs))

    origin = make(0.0, 0.0)
    if c == 4.0:
        raise DegenerateAtC4("interior fixed points coincide at c = 4")
    disc = 0.25 - 1.0 / c
    if disc < 0:
        return EquilibriaReport(c, origin, has_interior=False)
    r = math.sqrt(disc)
    p_plus = make(0.5 + 1.0 / c + r, 0.5 - 1.0 / c + r)
    p_minus = make(0.5 + 1.0 / c - r, 0.5 - 1.0 / c - r)
    return EquilibriaReport(c, origin, True, p_plus, p_minus)


def scalar_roots(c: float):
    """Nonzero roots of -u + 2c(1-u)u^2, ordered rho1 < rho0."""
    if c < 2.0:
        raise NoRealRoots("scalar reaction has no nonzero real roots for c < 2")
    r = math.sqrt(1.0 - 2.0 / c)
    return (0.5 * (1.0 - r), 0.5 * (1.0 + r))


# ---------------------------------------------------------------------------
# fields and the splitting integrator


@dataclass
class Field:
    x: np.ndarray
    h: float
    comps: dict
    time: float = 0.0

    @staticmethod
    def constant(spec: ReactionSpec, values, X: float, h: float) -> "Field":
        x = np.arange(-X, X + h / 2, h)
        comps = {
            name: np.full_like(x, float(v))
            for name, v in zip(spec.components, values)
        }
        return Field(x, h, comps)

    @staticmethod
    def from_profiles(spec: ReactionSpec, profiles, X: float, h: float) -> "Field":
        x = np.arange(-X, X + h / 2, h)
        comps = {name: f(x) for name, f in zip(spec.components, profiles)}
        return Field(x, h, comps)

    def copy(self) -> "Field":
        return Field(self.x, self.h, {k: v.copy() for k, v in self.comps.items()}, self.time)

    def values(self):
        return tuple(self.comps[name] for name in self.comps)


def heat_kernel(s: float, h: float, domain_len: float) -> np.ndarray:
    """Sampled Gaussian for e^{s*Laplacian}, truncated at 6 sqrt(s), sum 1."""
    if s <= 0:
        raise PairpopError("heat step needs s > 0")
    if 6.0 * math.sqrt(s) > domain_len:
        raise KernelTooWide("6 sqrt(s) exceeds the domain")
    R = max(1, int(math.ceil(6.0 * math.sqrt(s) / h)))
    y = np.arange(-R, R + 1) * h
    g = np.exp(-y * y / (4.0 * s))
    return g / g.sum()


def heat_step_values(u: np.ndarray, s: float, h: float, kernel=None) -> np.ndarray:
    """One heat step on a sampled function; reflecting (Neumann) boundary.

    Symmetric padding plus a symmetric normalized kernel conserves the grid
    sum exactly and obeys the max principle (each output is a convex
    combination of inputs).
    """
    g = heat_kernel(s, h, (u.size - 1) * h) if kernel is None else kernel
    R = g.size // 2
    up = np.pad(u, R, mode="symmetric")
    return np.convolve(up, g, mode="valid")


def heat_step(fld: Field, s: float) -> Field:
    g = heat_kernel(s, fld.h, (fld.x.size - 1) * fld.h)
    out = {k: heat_step_values(v, s, fld.h, kernel=g) for k, v in fld.comps.items()}
    return Field(fld.x, fld.h, out, fld.time + s)


def _react_rk4(spec: ReactionSpec, comps, dt: float, nsub: int):
    hdt = dt / nsub
    cur = comps
    for _ in range(nsub):
        k1 = reaction_terms(spec, cur)
        k2 = reaction_terms(spec, tuple(c + 0.5 * hdt * k for c, k in zip(cur, k1)))
        k3 = reaction_terms(spec, tuple(c + 0.5 * hdt * k for c, k in zip(cur, k2)))
        k4 = reaction_terms(spec, tuple(c + hdt * k for c, k in zip(cur, k3)))
        cur = tuple(
            c + hdt / 6.0 * (a + 2 * b + 2 * d + e)
            for c, a, b, d, e in zip(cur, k1, k2, k3, k4)
        )
    return cur


def _check_region(spec: ReactionSpec, comps, t: float):
    if spec.system != "uv":
        return
    u, v = comps
    worst = max(
        float(-u.min()),
        float(-v.min()),
        float(u.max() - 1.0),
        float(v.max() - 1.0),
        float((v - u).max()),
    )
    if worst > REGION_ABORT:
        raise RegionEscape(
            f"(u, v) left the triangular region by {worst:.3e} at t={t:.5g}"
        )


@dataclass
class FieldTrajectory:
    spec: ReactionSpec
    times: list
    fields: list

    @property
    def final(self) -> Field:
        return self.fields[-1]


def trotter_integrate(
    spec: ReactionSpec,
    init: Field,
    T: float,
    s: float,
    nsub: int = 2,
    record_every: int | None = None,
    observer=None,
) -> FieldTrajectory:
    """Alternate reaction RK4 and heat steps of length s up to time T.

    The (u, v) system is required to stay in its triangular region; leaving
    it beyond 1e-6 aborts, since the exact flow cannot do that and the
    violation indicates s is too large.
    """
    nsteps = int(round(T / s))
    fld = init.copy()
    names = spec.components
    times = [fld.time]
    fields = [fld.copy()]
    kernel = heat_kernel(s, fld.h, (fld.x.size - 1) * fld.h)
    for k in range(nsteps):
        comps = tuple(fld.comps[name] for name in names)
        comps = _react_rk4(spec, comps, s, nsub)
        comps = tuple(heat_step_values(cv, s, fld.h, kernel=kernel) for cv in comps)
        fld = Field(fld.x, fld.h, dict(zip(names, comps)), fld.time + s)
        _check_region(spec, comps, fld.time)
        if observer is not None:
            observer(fld)
        if record_every and ((k + 1) % record_every == 0 or k == nsteps - 1):
            times.append(fld.time)
            fields.append(fld.copy())
    if not record_every:
        times.append(fld.time)
        fields.append(fld)
    return FieldTrajectory(spec, times, fields)


# ---------------------------------------------------------------------------
# initial profiles


def transition_h(l: float):
    """Quadratic ramp: 0 below -l, 1 above l, C^1, symmetric about (0, 1/2)."""

    def h(x):
        x = np.asarray(x, float)
        out = np.where(
            x <= 0.0,
            0.5 * np.clip((x + l) / l, 0.0, None) ** 2,
            1.0 - 0.5 * np.clip((l - x) / l, 0.0, None) ** 2,
        )
        return np.where(x < -l, 0.0, np.where(x > l, 1.0, out))

    return h


def profile_f0(L: float, l: float):
    """Plateau of height 1 on [-L+l, L-l] with quadratic ramps to 0.

    |f0''| <= 1/l^2 everywhere, which is what makes the heat step push the
    ramp feet upward at a known rate.
    """
    if not L > l > 0:
        raise PairpopError("need L > l > 0")
    h = transition_h(l)

    def f0(x):
        x = np.asarray(x, float)
        ax = np.abs(x)
        return np.where(
            ax <= L - l, 1.0, np.where(ax >= L + l, 0.0, h(L - ax))
        )

    return f0


# ---------------------------------------------------------------------------
# front-regeneration checker


def region_r0(c: float, u: float, v: float) -> bool:
    """Start region: at least 0.04 left of the eta1 nullcline, v in [0.55, 0.8]."""
    return (
        0.55 <= v <= 0.8
        and v <= u
        and u < (1.0 + 2 * c) * v / (1.0 + 2 * c * v) - 0.04
    )


@dataclass
class StarReport:
    holds: bool
    c: float
    D1: float
    d1: float
    T: float
    min_v_on_target: float
    times: np.ndarray
    wet_width: np.ndarray

    def post_transient_nondecreasing(self, slack: float = 0.0) -> bool:
        """Width never shrinks (beyond slack) once it first exceeds its t=0 value."""
        w = self.wet_width
        start = 0
        for i, wi in enumerate(w):
            if wi > w[0]:
                start = i
                break
        return bool(np.all(np.diff(w[start:]) >= -slack))


def condition_star_check(
    c: float,
    D1: float,
    d1: float,
    L: float,
    l: float,
    T: float,
    s: float,
    a0: float,
    b0: float,
    h: float = 0.02,
    record_every: int = 10,
) -> StarReport:
    """Integrate (a0 f0, b0 f0) and report whether v_T > d1 on [-3L, 3L].

    The time series of the width of {x : v > d1} is recorded so the
    regeneration behaviour (spread after a transient) can be gated.  A
    negative result is a valid report, not an error.
    """
    if not b0 >= D1:
        raise PairpopError("need b0 >= D1")
    if not region_r0(c, a0, b0):
        raise PairpopError("(a0, b0) must lie in the start region")
    spec = ReactionSpec("uv", c)
    X = 3 * L + 3 * math.sqrt(T) + 2.0
    f0 = profile_f0(L, l)
    fld = Field.from_profiles(
        spec, [lambda x: a0 * f0(x), lambda x: b0 * f0(x)], X, h
    )
    times = [0.0]
    widths = [h * int(np.count_nonzero(fld.comps["v"] > d1))]

    step = {"k": 0}

    def obs(f: Field):
        step["k"] += 1
        if step["k"] % record_every == 0:
            times.append(f.time)
            widths.append(h * int(np.count_nonzero(f.comps["v"] > d1)))

    traj = trotter_integrate(spec, fld, T, s, observer=obs)
    final = traj.final
    mask = np.abs(final.x) <= 3 * L
    vmin = float(final.comps["v"][mask].min())
    times.append(final.time)
    widths.append(h * int(np.count_nonzero(final.comps["v"] > d1)))
    return StarReport(
        holds=bool(vmin > d1),
        c=c,
        D1=D1,
        d1=d1,
        T=T,
        min_v_on_target=vmin,
        times=np.array(times),
        wet_width=np.array(widths),
    )
