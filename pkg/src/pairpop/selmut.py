"""Selection-mutation flow on the phenotype simplex.

The vector field is

    d pi_x / dt = pi_x (m_x - mbar) + mu (1 - (2L+1) pi_x),

whose component sum is identically zero, so the flow preserves total mass.
For interior states it ascends V = mbar/2 + mu * sum log pi_x.  This module
integrates the flow, solves its stationarity condition, reduces the
three-site symmetric case to an exact cubic, and evaluates the closed-form
constants and invariant-set drift inequalities of the small- and large-mu
regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pairpop.errors import (
    BadKernel,
    NoConvergence,
    NonInteriorMeasure,
    PreconditionViolated,
    SimplexEscape,
    StepRejected,
)
from pairpop.measures import (
    FitnessParams,
    SimplexMeasure,
    SpeciationConstants,
    fitness_vector,
    lyapunov_value,
    mean_fitness,
)

SIMPLEX_ABORT_TOL = 1e-7


def selmut_rhs(pi, p: FitnessParams) -> np.ndarray:
    v = pi.values if isinstance(pi, SimplexMeasure) else np.asarray(pi, float)
    m = fitness_vector(v, p)
    mbar = float(v @ m)
    return v * (m - mbar) + p.mu * (1.0 - p.n * v)


@dataclass(frozen=True)
class SelmutTrajectory:
    times: np.ndarray
    states: np.ndarray  # shape (nt, 2L+1)
    lyapunov: np.ndarray
    mbar: np.ndarray

    @property
    def final(self) -> SimplexMeasure:
        return SimplexMeasure(self.states[-1])


def _check_on_simplex(y, t):
    if (
        not np.all(np.isfinite(y))
        or y.min() < -SIMPLEX_ABORT_TOL
        or abs(y.sum() - 1.0) > SIMPLEX_ABORT_TOL
    ):
        raise SimplexEscape(
            f"state left the simplex at t={t:.6g}: "
            f"min={y.min():.3e}, mass drift={y.sum() - 1.0:.3e}; reduce dt"
        )


def integrate(
    pi0,
    p: FitnessParams,
    T: float,
    dt: float = 1e-3,
    method: str = "rk4",
    record_every: int = 1,
) -> SelmutTrajectory:
    """Integrate the flow for time T.

    ``rk4`` is a fixed-step classical Runge-Kutta scheme with step dt;
    ``rk45`` is adaptive (per-component tolerance 1e-9).  The integrator
    never clips: a state leaving the simplex beyond 1e-7 aborts, since the
    exact flow preserves the simplex and a violation means dt is too large.
    """
    y = np.array(pi0.values if isinstance(pi0, SimplexMeasure) else pi0, float)
    f = lambda u: selmut_rhs(u, p)

    def diag(y):
        m = fitness_vector(y, p)
        mb = float(y @ m)
        V = 0.5 * mb + p.mu * float(np.log(y).sum()) if np.all(y > 0) else math.nan
        return V, mb

    if method == "rk45":
        from scipy.integrate import solve_ivp

        sol = solve_ivp(
            lambda t, u: f(u), (0.0, T), y,
            method="RK45", rtol=1e-9, atol=1e-12, dense_output=False,
        )
        if not sol.success:
            raise StepRejected(f"adaptive integration failed: {sol.message}")
        times = sol.t
        states = sol.y.T.copy()
        for t, row in zip(times, states):
            _check_on_simplex(row, t)
        vals = np.array([diag(row) for row in states])
        return SelmutTrajectory(times, states, vals[:, 0], vals[:, 1])

    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")

    nsteps = int(round(T / dt))
    times = [0.0]
    states = [y.copy()]
    Vs = []
    mbs = []
    V, mb = diag(y)
    Vs.append(V)
    mbs.append(mb)
    for k in range(nsteps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        _check_on_simplex(y, (k + 1) * dt)
        if (k + 1) % record_every == 0 or k == nsteps - 1:
            times.append((k + 1) * dt)
            states.append(y.copy())
            V, mb = diag(y)
            Vs.append(V)
            mbs.append(mb)
    return SelmutTrajectory(
        np.array(times), np.array(states), np.array(Vs), np.array(mbs)
    )


def stationarity_residual(pi, p: FitnessParams) -> float:
    """Max-norm of m_x - mbar + mu (1/pi_x - (2L+1)) over x."""
    v = pi.values if isinstance(pi, SimplexMeasure) else np.asarray(pi, float)
    m = fitness_vector(v, p)
    mbar = float(v @ m)
    return float(np.max(np.abs(m - mbar + p.mu * (1.0 / v - p.n))))


def find_stationary(
    p: FitnessParams,
    init,
    tol: float = 1e-10,
    max_iter: int = 200,
):
    """Solve the interior stationarity condition by damped Newton.

    Newton steps are taken on the mass-conserving affine slice; when a step
    stalls, the solver integrates the flow for 10/mu time units and retries,
    so the basin reached follows the supplied init.  Returns
    (SimplexMeasure, residual).
    """
    if p.mu <= 0:
        raise PreconditionViolated("interior stationary points need mu > 0")
    y = np.array(init.values if isinstance(init, SimplexMeasure) else init, float)
    if np.any(y <= 0):
        raise NonInteriorMeasure("need an interior starting measure")
    n = p.n
    bmat = p.bmat()

    def rhs_and_jac(v):
        m = p.K * (bmat @ (p.K * v))
        mbar = float(v @ m)
        r = v * (m - mbar) + p.mu * (1.0 - n * v)
        # d m_x / d pi_z = K_x B_{x-z} K_z ; d mbar / d pi_z = 2 m_z
        dm = p.K[:, None] * bmat * p.K[None, :]
        J = (
            np.diag(m - mbar - p.mu * n)
            + v[:, None] * dm
            - 2.0 * v[:, None] * m[None, :]
        )
        return r, J

    def resid(v):
        m = p.K * (bmat @ (p.K * v))
        mbar = float(v @ m)
        return float(np.max(np.abs(m - mbar + p.mu * (1.0 / v - n))))

    ones = np.ones(n)
    best, best_r = y.copy(), resid(y)
    for outer in range(max_iter):
        r, J = rhs_and_jac(y)
        cur = resid(y)
        if cur < tol:
            return SimplexMeasure(y), cur
        A = np.vstack([J, ones])
        bvec = np.concatenate([-r, [1.0 - y.sum()]])
        try:
            step, *_ = np.linalg.lstsq(A, bvec, rcond=None)
        except np.linalg.LinAlgError:
            step = None
        moved = False
        if step is not None and np.all(np.isfinite(step)):
            lam = 1.0
            while lam > 1e-8:
                cand = y + lam * step
                if np.all(cand > 0) and resid(cand) < cur:
                    y = cand
                    moved = True
                    break
                lam *= 0.5
        if not moved:
            # Newton stalled: follow the flow toward the attractor instead.
            traj = integrate(y, p, T=10.0 / p.mu, method="rk45")
            y = traj.states[-1]
            y = np.maximum(y, 1e-300)
            y /= y.sum()
        if resid(y) < best_r:
            best, best_r = y.copy(), resid(y)
    if best_r < tol:
        return SimplexMeasure(best), best_r
    raise NoConvergence(
        f"stationary solve stalled at residual {best_r:.3e}",
        best=SimplexMeasure(best),
        residual=best_r,
        iterations=max_iter,
    )


# ---------------------------------------------------------------------------
# three-site symmetric reduction


@dataclass(frozen=True)
class CubicReduction:
    """d pi_0/dt as an exact cubic on the symmetric three-site slice."""

    b: float
    mu: float
    coeffs: tuple  # (c3, c2, c1, c0) of c3 x^3 + c2 x^2 + c1 x + c0
    roots: tuple  # real roots in [0, 1], ascending

    def __call__(self, x):
        c3, c2, c1, c0 = self.coeffs
        return ((c3 * x + c2) * x + c1) * x + c0


def cubic_reduce_1d(b: float, mu: float) -> CubicReduction:
    """Exact coefficients and [0,1] roots of the symmetric L=1 reduction.

    With K = (1/2, 1, 1/2), threshold kernel (b, M=2) and pi_{-1} = pi_1,
    d pi_0/dt = -((b+1)/8) x^3 + ((1-b)/4) x^2 + ((3b-1-24 mu)/8) x + mu.
    """
    if not 0.0 <= b <= 1.0 or mu < 0:
        raise ValueError("need 0 <= b <= 1 and mu >= 0")
    coeffs = (-(b + 1.0) / 8.0, (1.0 - b) / 4.0, (3.0 * b - 1.0 - 24.0 * mu) / 8.0, mu)
    raw = np.roots(coeffs)
    roots = []
    for z in raw:
        if abs(z.imag) > 1e-9:
            continue
        x = float(z.real)
        # Newton polish so |p(x)| < 1e-12 holds exactly as promised
        c3, c2, c1, c0 = coeffs
        for _ in range(60):
            px = ((c3 * x + c2) * x + c1) * x + c0
            dpx = (3 * c3 * x + 2 * c2) * x + c1
            if dpx == 0 or abs(px) < 1e-16:
                break
            x -= px / dpx
        if -1e-9 <= x <= 1 + 1e-9:
            roots.append(min(max(x, 0.0), 1.0))
    roots.sort()
    # collapse duplicates from a double root only if truly coincident
    dedup = []
    for r in roots:
        if not dedup or abs(r - dedup[-1]) > 1e-9:
            dedup.append(r)
        # keep double roots visible as a repeated value
        elif abs(r - dedup[-1]) > 0:
            dedup.append(dedup[-1])
    return CubicReduction(b, mu, coeffs, tuple(roots))


def symmetric_three_site_params(b: float, mu: float) -> FitnessParams:
    """The L=1 instance behind the cubic: K = (1/2, 1, 1/2), threshold (b, 2)."""
    return FitnessParams(1, [0.5, 1.0, 0.5], b=b, M=2, mu=mu)


def symmetric_start(pi0: float) -> SimplexMeasure:
    """Three-site measure with the side mass split exactly evenly."""
    side = (1.0 - pi0) / 2.0
    return SimplexMeasure([side, pi0, side])


# ---------------------------------------------------------------------------
# closed-form constants and invariant sets


def theory_constants(p: FitnessParams) -> SpeciationConstants:
    """Evaluate the closed-form constants of the threshold-kernel regimes.

    Requires the threshold form (b, M) with L < M <= 2L.  The bimodal-set
    constants (c2, eps2, eps3) additionally need M even; they are left None
    otherwise.  Terms that reference K_{p+1} are dropped from their minima
    when p = L (the site range they control is empty).
    """
    if p.b is None or p.M is None:
        raise BadKernel("theory constants need the threshold kernel form")
    if not p.L < p.M <= 2 * p.L:
        raise BadKernel(f"threshold kernel needs L < M <= 2L, got L={p.L}, M={p.M}")
    L, M, b = p.L, p.M, p.b
    l = M - L
    K = p.K
    KL = float(K[0])
    Kl = float(K[L + l])
    K1 = float(K[L + 1])
    k = float(np.min(np.abs(np.diff(K))))
    n = 2 * L + 1

    c1 = min(KL**2 * (L - l) / n**2, KL**4 * (L - l) / (4.0 * n**3))
    delta2 = min(KL**2 / (2.0 * n), KL**4 / (4.0 * n * Kl**2), KL**2 / (2.0 * n**2))

    eps1 = mu_max_a1 = None
    if b > 0 and k > 0:
        eps1 = min(
            1.0 / (4.0 * L),
            b * k / (2.0 * Kl**2 * (L - l + 1)),
            k / (16.0 * L * K1),
        )
        mu_max_a1 = b * k * eps1 / 8.0

    c2 = eps2 = eps3 = pp = mu_max_a2 = None
    if M % 2 == 0:
        pp = M // 2
        Kp = float(K[L + pp])
        terms_c2 = [b, Kp**2 / 16.0]
        if pp + 1 <= L:
            Kp1 = float(K[L + pp + 1])
            terms_c2.append((1.0 - b) * Kp * (Kp - Kp1) / 8.0)
        c2 = 0.5 * min(terms_c2)
        if c2 > 0:
            terms_e2 = [
                1.0 / (8.0 * n),
                Kp**2 / (16.0 * Kl * (L - l + 1)),
                c2 / (16.0 * n * Kp),
            ]
            if pp + 1 <= L:
                Kp1 = float(K[L + pp + 1])
                terms_e2.append(Kp * (Kp - Kp1) / (8.0 * Kp1**2 * (L - l + 1)))
            eps2 = min(terms_e2)
            eps3 = min(math.log(2.0), math.log1p(c2 / (4.0 * Kp**2)))
            mu_max_a2 = 3.0 * c2 * eps2 / 8.0

    return SpeciationConstants(
        L=L, l=l, k=k, c1=c1, delta2=delta2,
        eps1=eps1, c2=c2, eps2=eps2, eps3=eps3, p=pp,
        mu_max_a1=mu_max_a1, mu_max_a2=mu_max_a2, b=b,
        extras={"K_L": KL, "K_l": Kl, "K_1": K1},
    )


def _a2_ok(p: FitnessParams, sc: SpeciationConstants) -> None:
    Kp = p.K[p.L + sc.p]
    if p.b / (1.0 - p.b) > Kp**2 / 8.0:
        raise PreconditionViolated("bimodal set needs b/(1-b) <= K_p^2 / 8")


def invariant_set_check(pi, p: FitnessParams, which: str, sc=None) -> dict:
    """Membership and boundary-drift sign checks for the two invariant sets.

    ``which`` is "A1" (delta-like: pi_x <= eps1 off 0) or "A2" (bimodal:
    pi_x <= eps2 off +-p and |log(pi_p / pi_{-p})| <= eps3).  The drift flags
    evaluate the exact vector field at the supplied point: every active
    eps-face must have strictly inward flow, zero faces flow inward at rate
    mu, and on the A2 log-ratio faces the ratio must relax.  Raises
    PreconditionViolated when (mu, b, eps) do not satisfy the proposition's
    hypotheses, signalling a vacuous (not failed) check.
    """
    if sc is None:
        sc = theory_constants(p)
    v = pi.values if isinstance(pi, SimplexMeasure) else np.asarray(pi, float)
    L, n = p.L, p.n
    m = fitness_vector(v, p)
    mbar = float(v @ m)
    drift = v * (m - mbar) + p.mu * (1.0 - n * v)

    if which == "A1":
        if sc.eps1 is None or sc.mu_max_a1 is None:
            raise PreconditionViolated("A1 constants undefined (b = 0 or flat K)")
        if not p.mu < sc.mu_max_a1:
            raise PreconditionViolated(
                f"A1 needs mu < b*k*eps1/8 = {sc.mu_max_a1:.3e}, got {p.mu:.3e}"
            )
        eps = sc.eps1
        off = np.arange(n) != L
        inside = bool(np.all(v[off] <= eps + 1e-15))
        face = off & np.isclose(v, eps, rtol=0, atol=1e-12)
        zero = off & (v == 0.0)
        ok = bool(np.all(drift[face] < 0)) and bool(np.all(drift[zero] > 0))
        quantitative = bool(np.all(drift[face] <= -eps * p.b * sc.k / 8.0 + p.mu))
        return {
            "inside": inside,
            "boundary_drift_ok": ok and quantitative,
            "n_faces": int(face.sum()),
        }

    if which == "A2":
        if sc.eps2 is None or sc.eps3 is None or sc.mu_max_a2 is None:
            raise PreconditionViolated("A2 constants undefined (M odd or c2 = 0)")
        _a2_ok(p, sc)
        if not p.mu < sc.mu_max_a2:
            raise PreconditionViolated(
                f"A2 needs mu < 3*c2*eps2/8 = {sc.mu_max_a2:.3e}, got {p.mu:.3e}"
            )
        pp = sc.p
        ip, im = L + pp, L - pp
        off = np.ones(n, bool)
        off[[ip, im]] = False
        logratio = math.log(v[ip] / v[im]) if v[ip] > 0 and v[im] > 0 else math.inf
        inside = bool(np.all(v[off] <= sc.eps2 + 1e-15)) and abs(logratio) <= sc.eps3 + 1e-12
        face = off & np.isclose(v, sc.eps2, rtol=0, atol=1e-15)
        zero = off & (v == 0.0)
        ok = bool(np.all(drift[face] < 0)) and bool(np.all(drift[zero] > 0))
        ratio_ok = True
        if abs(abs(logratio) - sc.eps3) < 1e-12:
            hi, lo = (ip, im) if logratio > 0 else (im, ip)
            dlog = m[hi] - m[lo] + p.mu * (1.0 / v[hi] - 1.0 / v[lo])
            ratio_ok = dlog < 0
        return {
            "inside": inside,
            "boundary_drift_ok": ok and ratio_ok,
            "n_faces": int(face.sum()),
        }

    raise ValueError(f"unknown invariant set {which!r}")
