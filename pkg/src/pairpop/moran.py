"""Finite-population Moran engines on the phenotype grid.

Both models keep N particles and replace one particle per event (replacement
sampling), so the empirical measure lives on the N-rational simplex.  Rates
per ordered pair (x replaced by y):

    selection    N pi_x m_y pi_y        (both modes)
    mutation     N mu pi_x              (both modes)
    resampling   N^2/2 pi_x pi_y        (weak mode only)

Sampling is exact next-event (Gillespie) with full rate recomputation after
every event; fidelity to the Poisson construction beats speed at desk scale.
Runs are deterministic given the seed.
"""

from __future__ import annotations

import math
import random
from array import array
from dataclasses import dataclass, field

import numpy as np

from pairpop.errors import NonInteriorMeasure, PairpopError
from pairpop.measures import FitnessParams, SimplexMeasure, mean_fitness

CH_SELECTION, CH_MUTATION, CH_RESAMPLE = 0, 1, 2
CHANNEL_NAMES = {CH_SELECTION: "selection", CH_MUTATION: "mutation", CH_RESAMPLE: "resample"}


@dataclass
class MoranTrajectory:
    mode: str
    N: int
    T: float
    seed: int
    counts0: np.ndarray
    times: np.ndarray  # event times
    from_x: np.ndarray  # site indices in [-L, L]
    to_x: np.ndarray
    channel: np.ndarray
    qv_realized: np.ndarray | None = None  # (n, n) at time T
    qv_predicted: np.ndarray | None = None
    snapshots: list = field(default_factory=list)  # (t, counts) pairs

    @property
    def n_events(self) -> int:
        return self.times.size

    def counts_path(self):
        """Counts before each event and final counts: shape (n_events+1, n)."""
        L = (self.counts0.size - 1) // 2
        out = np.empty((self.n_events + 1, self.counts0.size), dtype=np.int64)
        out[0] = self.counts0
        for i, (fx, tx) in enumerate(zip(self.from_x, self.to_x)):
            out[i + 1] = out[i]
            out[i + 1][fx + L] -= 1
            out[i + 1][tx + L] += 1
        return out

    def measure_at(self, t: float) -> SimplexMeasure:
        k = int(np.searchsorted(self.times, t, side="right"))
        L = (self.counts0.size - 1) // 2
        c = self.counts0.copy()
        for fx, tx in zip(self.from_x[:k], self.to_x[:k]):
            c[fx + L] -= 1
            c[tx + L] += 1
        return SimplexMeasure(c / self.N)


def counts_from_measure(pi: SimplexMeasure, N: int) -> np.ndarray:
    """Round N*pi to integer counts summing to N (largest-remainder)."""
    raw = pi.values * N
    base = np.floor(raw).astype(int)
    short = N - base.sum()
    order = np.argsort(-(raw - base))
    base[order[:short]] += 1
    return base


def simulate(
    mode: str,
    p: FitnessParams,
    N: int,
    T: float,
    seed: int,
    init: SimplexMeasure | np.ndarray | None = None,
    record_events: bool = True,
    snapshot_dt: float | None = None,
    qv: bool = False,
    max_events: int | None = None,
) -> MoranTrajectory:
    """Run the strong- or weak-selection model to time T.

    ``init`` may be a SimplexMeasure (rounded to counts) or an integer counts
    vector; default is near-uniform.  With ``qv`` the running realized and
    predicted quadratic covariation matrices are accumulated event by event
    (weak mode's martingale bracket check).
    """
    if mode not in ("strong", "weak"):
        raise ValueError("mode must be 'strong' or 'weak'")
    if N < 2:
        raise PairpopError("need N >= 2")
    n = p.n
    L = p.L
    if init is None:
        counts = counts_from_measure(SimplexMeasure.uniform(L), N)
    elif isinstance(init, SimplexMeasure):
        counts = counts_from_measure(init, N)
    else:
        counts = np.asarray(init, dtype=int).copy()
        if counts.sum() != N or np.any(counts < 0):
            raise PairpopError("init counts must be >= 0 and sum to N")
    counts0 = counts.copy()

    K = tuple(float(v) for v in p.K)
    Bm = tuple(tuple(float(v) for v in row) for row in p.bmat())
    mu = p.mu
    weak = mode == "weak"

    rng = random.Random(seed)
    expov = rng.expovariate
    uni = rng.random

    cnt = [int(c) for c in counts]
    t = 0.0
    ev_t = array("d")
    ev_from = array("i")
    ev_to = array("i")
    ev_ch = array("b")
    realized = [[0.0] * n for _ in range(n)] if qv else None
    predicted = [[0.0] * n for _ in range(n)] if qv else None
    snaps = []
    next_snap = 0.0 if snapshot_dt else math.inf
    invN = 1.0 / N
    invN2 = invN * invN
    n_events = 0

    while True:
        pi = [c * invN for c in cnt]
        m = [K[x] * sum(Bm[x][z] * K[z] * pi[z] for z in range(n)) for x in range(n)]
        rates = []
        total = 0.0
        for x in range(n):
            px = pi[x]
            if px == 0.0:
                continue
            for y in range(n):
                if y == x:
                    continue
                r_sel = N * px * m[y] * pi[y]
                if r_sel > 0.0:
                    rates.append((r_sel, x, y, CH_SELECTION))
                    total += r_sel
                if mu > 0.0:
                    r_mut = N * mu * px
                    rates.append((r_mut, x, y, CH_MUTATION))
                    total += r_mut
                if weak:
                    r_rs = 0.5 * N * N * px * pi[y]
                    if r_rs > 0.0:
                        rates.append((r_rs, x, y, CH_RESAMPLE))
                        total += r_rs
        if total <= 0.0:
            dt_left = T - t
            if qv and dt_left > 0:
                _acc_predicted(predicted, pi, dt_left, n)
            if snapshot_dt:
                while next_snap <= T:
                    snaps.append((next_snap, np.array(cnt, dtype=np.int64)))
                    next_snap += snapshot_dt
            t = T
            break
        dt = expov(total)
        t_new = t + dt
        seg = min(t_new, T) - t
        if qv and seg > 0:
            _acc_predicted(predicted, pi, seg, n)
        if snapshot_dt:
            # state is constant on [t, t_new); snapshots strictly before the
            # next event see the pre-event counts
            while next_snap < t_new and next_snap <= T:
                snaps.append((next_snap, np.array(cnt, dtype=np.int64)))
                next_snap += snapshot_dt
        if t_new >= T:
            t = T
            break
        t = t_new
        z = uni() * total
        acc = 0.0
        hit = rates[-1]
        for item in rates:
            acc += item[0]
            if z <= acc:
                hit = item
                break
        _, fx, tx, ch = hit
        cnt[fx] -= 1
        cnt[tx] += 1
        if qv:
            realized[fx][fx] += invN2
            realized[tx][tx] += invN2
            realized[fx][tx] -= invN2
            realized[tx][fx] -= invN2
        if record_events:
            ev_t.append(t)
            ev_from.append(fx - L)
            ev_to.append(tx - L)
            ev_ch.append(ch)
        n_events += 1
        if max_events is not None and n_events >= max_events:
            break

    return MoranTrajectory(
        mode=mode,
        N=N,
        T=T,
        seed=seed,
        counts0=counts0,
        times=np.array(ev_t, dtype=float),
        from_x=np.array(ev_from, dtype=int),
        to_x=np.array(ev_to, dtype=int),
        channel=np.array(ev_ch, dtype=int),
        qv_realized=np.array(realized) if qv else None,
        qv_predicted=np.array(predicted) if qv else None,
        snapshots=snaps,
    )


def _acc_predicted(predicted, pi, dt, n):
    for a in range(n):
        pa = pi[a]
        row = predicted[a]
        for b in range(n):
            row[b] += ((pi[a] if a == b else 0.0) - pa * pi[b]) * dt


def qv_estimate(traj: MoranTrajectory, x: int, y: int):
    """Realized vs predicted quadratic covariation paths for sites x, y.

    Returns (times, realized, predicted) sampled just after each event.  The
    realized path sums compensated jump products; the predicted path is the
    exact piecewise integral of delta_xy pi_x - pi_x pi_y along the recorded
    trajectory.
    """
    if traj.times.size == 0:
        return np.array([0.0]), np.array([0.0]), np.array([0.0])
    N = traj.N
    L = (traj.counts0.size - 1) // 2
    path = traj.counts_path() / N  # measure before each event
    dx = (traj.to_x == x).astype(float) - (traj.from_x == x).astype(float)
    dy = (traj.to_x == y).astype(float) - (traj.from_x == y).astype(float)
    realized = np.cumsum(dx * dy) / N**2
    pix = path[:-1, x + L]
    piy = path[:-1, y + L]
    integrand = (pix if x == y else np.zeros_like(pix)) - pix * piy
    seg = np.diff(np.concatenate([[0.0], traj.times]))
    predicted = np.cumsum(integrand * seg)
    return traj.times, realized, predicted


def ek_log_density(pi, p: FitnessParams) -> float:
    """Unnormalized stationary log-density of the weak-selection limit.

    log nu(pi) = (mu - 1) sum_x log pi_x + mbar(pi), up to the normalizer.
    """
    v = pi.values if isinstance(pi, SimplexMeasure) else np.asarray(pi, float)
    if np.any(v <= 0):
        raise NonInteriorMeasure("density needs an interior measure")
    return float((p.mu - 1.0) * np.log(v).sum() + mean_fitness(v, p))
