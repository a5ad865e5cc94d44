"""Two-sex branching particle system on a finite torus.

Each site carries a male nest and a female nest, each holding 0 or 1
particle.  Particles die at rate delta; a birth into an empty nest fires at
rate lambda per eligible parent pair, where the pair is either any
(male-site, female-site) combination in the interaction neighbourhood
("paired" rule) or a single doubly-occupied site ("same_site" rule).  Rapid
stirring exchanges whole site pairs ("lilypad") or single nests per floor
("individual") across edges at rate epsilon^-2.

Everything is driven by a seeded graphical event log: per-channel Poisson
arrival streams with uniform acceptance marks, derived deterministically
from (seed, channel identity).  Runs replay bit-identically, ordered initial
states driven by one log stay ordered, and raising lambda under the same log
(mark thinning) yields a dominating trajectory.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from pairpop.errors import CloudExplosion, PairpopError, UnorderedInputs

PAIRED_ANYWHERE = "paired"
SAME_SITE = "same_site"


def default_neighborhood(d: int):
    """Origin plus the 2d nearest neighbours."""
    offs = [tuple([0] * d)]
    for axis in range(d):
        for sgn in (-1, 1):
            v = [0] * d
            v[axis] = sgn
            offs.append(tuple(v))
    return tuple(offs)


@dataclass(frozen=True)
class Torus:
    sides: tuple

    @property
    def d(self) -> int:
        return len(self.sides)

    @property
    def nsites(self) -> int:
        out = 1
        for s in self.sides:
            out *= s
        return out

    def wrap(self, coords) -> int:
        idx = 0
        for c, s in zip(coords, self.sides):
            idx = idx * s + (c % s)
        return idx

    def coords(self, idx: int) -> tuple:
        out = []
        for s in reversed(self.sides):
            out.append(idx % s)
            idx //= s
        return tuple(reversed(out))

    def shift(self, idx: int, off) -> int:
        c = self.coords(idx)
        return self.wrap(tuple(a + b for a, b in zip(c, off)))

    def edges(self):
        """Undirected nearest-neighbour edges (site, site, axis)."""
        out = []
        for i in range(self.nsites):
            c = self.coords(i)
            for axis in range(self.d):
                off = [0] * self.d
                off[axis] = 1
                out.append((i, self.wrap(tuple(a + b for a, b in zip(c, off))), axis))
        return out


@dataclass(frozen=True)
class IPSParams:
    lam: float
    delta: float
    birth_rule: str = PAIRED_ANYWHERE
    d: int = 1
    neighborhood: tuple | None = None
    stirring: str = "none"  # none | lilypad | individual
    epsilon: float | None = None

    def __post_init__(self):
        if self.lam < 0 or self.delta < 0:
            raise PairpopError("rates must be >= 0")
        if self.birth_rule not in (PAIRED_ANYWHERE, SAME_SITE):
            raise ValueError(f"unknown birth rule {self.birth_rule!r}")
        if self.stirring not in ("none", "lilypad", "individual"):
            raise ValueError(f"unknown stirring mode {self.stirring!r}")
        if self.stirring != "none" and not self.epsilon:
            raise PairpopError("stirring needs epsilon > 0")
        if self.neighborhood is None:
            object.__setattr__(self, "neighborhood", default_neighborhood(self.d))
        else:
            nb = tuple(tuple(o) for o in self.neighborhood)
            if tuple([0] * self.d) not in nb:
                raise PairpopError("neighbourhood must contain the origin")
            object.__setattr__(self, "neighborhood", nb)

    @property
    def stir_rate(self) -> float:
        return 0.0 if self.stirring == "none" else self.epsilon**-2

    @property
    def c_star(self) -> float:
        """Documented flip-rate bound: delta + lam|N|^2 (paired), delta + lam|N|."""
        nN = len(self.neighborhood)
        if self.birth_rule == PAIRED_ANYWHERE:
            return self.delta + self.lam * nN * nN
        return self.delta + self.lam * nN


class LatticeState:
    """Per-site (male, female) occupancy bits plus the current clock."""

    __slots__ = ("torus", "male", "female", "time", "particles")

    def __init__(self, torus: Torus, male=None, female=None, time=0.0):
        self.torus = torus
        n = torus.nsites
        self.male = np.zeros(n, dtype=np.uint8) if male is None else np.array(male, dtype=np.uint8)
        self.female = np.zeros(n, dtype=np.uint8) if female is None else np.array(female, dtype=np.uint8)
        self.time = time
        self.particles = int(self.male.sum()) + int(self.female.sum())

    def copy(self) -> "LatticeState":
        return LatticeState(self.torus, self.male, self.female, self.time)

    @staticmethod
    def all_occupied(torus: Torus) -> "LatticeState":
        return LatticeState(torus, np.ones(torus.nsites, np.uint8), np.ones(torus.nsites, np.uint8))

    @staticmethod
    def single_pair(torus: Torus, site=0) -> "LatticeState":
        st = LatticeState(torus)
        st.male[site] = 1
        st.female[site] = 1
        st.particles = 2
        return st

    def pair_at(self, site: int) -> tuple:
        return (int(self.male[site]), int(self.female[site]))

    def leq(self, other: "LatticeState") -> bool:
        return bool(np.all(self.male <= other.male) and np.all(self.female <= other.female))


def observe(state: LatticeState, window=None) -> dict:
    """Densities of doubly-occupied, male and female nests, plus survival.

    Survival means some site holds both a male and a female particle.
    ``window`` is an iterable of site indices; default is the whole torus.
    """
    if window is None:
        m, f = state.male, state.female
    else:
        idx = np.asarray(list(window), dtype=int)
        m, f = state.male[idx], state.female[idx]
    n = m.size
    both = (m & f).sum()
    return {
        "pair_density": float(both) / n,
        "male_density": float(m.sum()) / n,
        "female_density": float(f.sum()) / n,
        "survival": bool(both > 0),
    }


# ---------------------------------------------------------------------------
# graphical event log


def _stream_key(seed: int, parts: tuple) -> int:
    h = hashlib.blake2b(
        ("|".join(str(p) for p in (seed,) + parts)).encode(), digest_size=16
    )
    return int.from_bytes(h.digest(), "big")


class _Stream:
    """Buffered Poisson arrivals with uniform marks for one channel."""

    __slots__ = ("rng", "rate", "t", "buf_t", "buf_u", "pos")

    def __init__(self, seed: int, key: tuple, rate: float):
        self.rng = np.random.Generator(np.random.Philox(key=_stream_key(seed, key)))
        self.rate = rate
        self.t = 0.0
        self.buf_t = None
        self.buf_u = None
        self.pos = 0

    def next(self):
        if self.rate <= 0:
            return (math.inf, 0.0)
        if self.buf_t is None or self.pos >= self.buf_t.size:
            gaps = self.rng.exponential(1.0 / self.rate, size=64)
            self.buf_t = self.t + np.cumsum(gaps)
            self.buf_u = self.rng.random(size=64)
            self.t = float(self.buf_t[-1])
            self.pos = 0
        out = (float(self.buf_t[self.pos]), float(self.buf_u[self.pos]))
        self.pos += 1
        return out


@dataclass(frozen=True)
class RefRates:
    """Rates at which the log's channels tick; thinning marks do the rest."""

    lam_ref: float
    delta_ref: float
    stir_ref: float = 0.0


class GraphicalEventLog:
    """Seeded arrival streams for every channel the model can use.

    Channel identities (not creation order) key the underlying counter-based
    generators, so the same (seed, channel) always replays the same stream
    and the log fully determines the trajectory from any initial state.
    """

    def __init__(self, seed: int, torus: Torus, params: IPSParams, refs: RefRates | None = None):
        if refs is None:
            refs = RefRates(
                lam_ref=params.lam, delta_ref=params.delta, stir_ref=params.stir_rate
            )
        if params.lam > refs.lam_ref or params.delta > refs.delta_ref:
            raise PairpopError("reference rates must dominate the model rates")
        self.seed = seed
        self.torus = torus
        self.rule = params.birth_rule
        self.neighborhood = params.neighborhood
        self.stirring = params.stirring
        self.refs = refs
        self.channels = self._build_channels()

    def _build_channels(self):
        chans = []
        t = self.torus
        offs = self.neighborhood
        for site in range(t.nsites):
            for m in (0, 1):
                chans.append(("D", site, m))
        if self.refs.lam_ref > 0:
            for site in range(t.nsites):
                for m in (0, 1):
                    if self.rule == PAIRED_ANYWHERE:
                        for i1 in range(len(offs)):
                            for i2 in range(len(offs)):
                                chans.append(("B", site, m, i1, i2))
                    else:
                        for i1 in range(len(offs)):
                            chans.append(("B", site, m, i1))
        if self.stirring != "none" and self.refs.stir_ref > 0:
            for eid, (a, b, axis) in enumerate(t.edges()):
                if self.stirring == "lilypad":
                    chans.append(("S", a, b))
                else:
                    for m in (0, 1):
                        chans.append(("S", a, b, m))
        return chans

    def _rate_of(self, chan) -> float:
        kind = chan[0]
        if kind == "D":
            return self.refs.delta_ref
        if kind == "B":
            return self.refs.lam_ref
        return self.refs.stir_ref

    def open_streams(self):
        return [_Stream(self.seed, c, self._rate_of(c)) for c in self.channels]

    def arrivals(self, chan: tuple, t0: float, t1: float):
        """All (time, mark) arrivals of one channel in [t0, t1)."""
        s = _Stream(self.seed, chan, self._rate_of(chan))
        out = []
        while True:
            t, u = s.next()
            if t >= t1:
                return out
            if t >= t0:
                out.append((t, u))


# ---------------------------------------------------------------------------
# event-driven evolution


class LatticeSimulation:
    """Applies one log's events in time order to one or more coupled states."""

    def __init__(self, params: IPSParams, log: GraphicalEventLog, states, check_order=False, record_arrivals=False):
        if isinstance(states, LatticeState):
            states = [states]
        self.params = params
        self.log = log
        self.states = states
        self.check_order = check_order
        self.record_arrivals = record_arrivals
        self.arrival_record = []
        self.time = min(s.time for s in states)
        self._streams = log.open_streams()
        self._heap = []
        for i, s in enumerate(self._streams):
            t, u = s.next()
            if math.isfinite(t):
                heapq.heappush(self._heap, (t, i, u))
        # fast-forward past anything at or before the states' clock
        while self._heap and self._heap[0][0] <= self.time:
            t, i, u = heapq.heappop(self._heap)
            tn, un = self._streams[i].next()
            if math.isfinite(tn):
                heapq.heappush(self._heap, (tn, i, un))
        self._order_violations = 0
        self.absorbed_at = None

    @property
    def order_violations(self) -> int:
        return self._order_violations

    def _apply(self, chan, mark, state: LatticeState):
        p = self.params
        t = self.log.torus
        kind = chan[0]
        if kind == "D":
            _, site, m = chan
            if mark <= p.delta / self.log.refs.delta_ref:
                arr = state.male if m == 0 else state.female
                if arr[site]:
                    arr[site] = 0
                    state.particles -= 1
        elif kind == "B":
            if mark > (p.lam / self.log.refs.lam_ref if self.log.refs.lam_ref > 0 else 0):
                return
            if p.birth_rule == PAIRED_ANYWHERE:
                _, site, m, i1, i2 = chan
                z1 = t.shift(site, p.neighborhood[i1])
                z2 = t.shift(site, p.neighborhood[i2])
                ok = state.male[z1] and state.female[z2]
            else:
                _, site, m, i1 = chan
                z = t.shift(site, p.neighborhood[i1])
                ok = state.male[z] and state.female[z]
            if ok:
                arr = state.male if m == 0 else state.female
                if not arr[site]:
                    arr[site] = 1
                    state.particles += 1
        else:  # stirring
            if p.stirring == "none":
                return
            if mark > p.stir_rate / self.log.refs.stir_ref:
                return
            if p.stirring == "lilypad":
                _, a, b = chan
                for arr in (state.male, state.female):
                    arr[a], arr[b] = arr[b], arr[a]
            else:
                _, a, b, m = chan
                arr = state.male if m == 0 else state.female
                arr[a], arr[b] = arr[b], arr[a]

    def advance(self, until_t: float):
        single = len(self.states) == 1
        while self._heap and self._heap[0][0] <= until_t:
            if single and self.states[0].particles == 0:
                break  # all-zero is absorbing; nothing left to resolve
            t, i, u = heapq.heappop(self._heap)
            chan = self.log.channels[i]
            if self.record_arrivals:
                self.arrival_record.append((chan, t, u))
            for st in self.states:
                self._apply(chan, u, st)
                st.time = t
            if single and self.states[0].particles == 0 and self.absorbed_at is None:
                self.absorbed_at = t
            if self.check_order:
                for lo, hi in zip(self.states, self.states[1:]):
                    if not lo.leq(hi):
                        self._order_violations += 1
            tn, un = self._streams[i].next()
            if math.isfinite(tn):
                heapq.heappush(self._heap, (tn, i, un))
        for st in self.states:
            st.time = until_t
        self.time = until_t
        return self.states[0] if len(self.states) == 1 else self.states


def advance(state: LatticeState, params: IPSParams, log: GraphicalEventLog, until_t: float) -> LatticeState:
    """Evolve one state through the log's events up to until_t."""
    if until_t < state.time:
        raise PairpopError("until_t must be >= state.time")
    sim = LatticeSimulation(params, log, state)
    sim.advance(until_t)
    return state


def coupled_advance(states, params: IPSParams, log: GraphicalEventLog, until_t: float):
    """Drive an ordered list of states with one shared log.

    Inputs must be ordered under the componentwise nest order; the shared
    construction preserves that order at every event time (checked).
    """
    for lo, hi in zip(states, states[1:]):
        if not lo.leq(hi):
            raise UnorderedInputs("initial states are not ordered")
    sim = LatticeSimulation(params, log, list(states), check_order=True)
    sim.advance(until_t)
    if sim.order_violations:
        raise PairpopError(
            f"monotone coupling violated {sim.order_violations} times"
        )
    return states


def run_extinction(params: IPSParams, torus: Torus, T: float, seed: int, init=None) -> dict:
    """Single trajectory summary: survival flag at T and extinction time."""
    state = LatticeState.single_pair(torus, torus.nsites // 2) if init is None else init
    log = GraphicalEventLog(seed, torus, params)
    sim = LatticeSimulation(params, log, state)
    sim.advance(T)
    obs = observe(state)
    return {
        "seed": seed,
        "survival": state.particles > 0 and obs["survival"],
        "extinct": state.particles == 0,
        "t_extinct": sim.absorbed_at,
        "final_particles": state.particles,
    }


# ---------------------------------------------------------------------------
# dual influence cloud (individual stirring)


@dataclass
class DualCloudStats:
    size: int
    real_size: int
    collisions: int
    branch_events: int
    truncated: bool = False


def dual_arity(params: IPSParams) -> int:
    """Nests one birth-rate evaluation reads beyond the target nest itself.

    Same-site rule: both floors of every non-origin neighbourhood site.
    Paired rule: same-floor nests of the non-origin sites plus the opposite
    floor of every neighbourhood site (the target's own floor at the origin
    is redundant: the rate vanishes unless the target nest is empty).
    """
    non_origin = len(params.neighborhood) - 1
    if params.birth_rule == SAME_SITE:
        return 2 * non_origin
    return 2 * non_origin + 1


def dual_influence(
    params: IPSParams,
    torus: Torus,
    t: float,
    epsilon: float,
    seed: int,
    start_nest=None,
    c_star: float | None = None,
    max_size: int = 4096,
) -> DualCloudStats:
    """Simulate the backward influence cloud of one nest for dual time t.

    Each particle (fictitious or not) branches at rate c*, adding the nests
    its birth rule reads; a child landing on an occupied nest counts as a
    collision and the child is fictitious, as is every descendant of a
    fictitious particle.  Per-floor stirring moves a particle along each
    adjacent edge at rate epsilon^-2; when both ends hold real particles the
    exchange is a swap, so stirring never merges nests and never produces
    collisions.
    """
    if params.stirring != "individual":
        raise PairpopError("dual influence is defined for individual stirring")
    cstar = params.c_star if c_star is None else c_star
    rng = np.random.Generator(np.random.Philox(key=_stream_key(seed, ("dual",))))
    stir = epsilon**-2
    d = torus.d
    start = (torus.nsites // 2, 0) if start_nest is None else tuple(start_nest)
    # real particles keep exclusive nests; fictitious ones wander freely
    real_nests = {start}
    fict = []  # nests, multiplicity allowed
    clock = 0.0
    collisions = 0
    branches = 0
    truncated = False
    offsets = [o for o in params.neighborhood if any(o)]

    def children_of(site, floor):
        out = []
        if params.birth_rule == SAME_SITE:
            for off in offsets:
                s2 = torus.shift(site, off)
                out.append((s2, 0))
                out.append((s2, 1))
        else:
            for off in offsets:
                s2 = torus.shift(site, off)
                out.append((s2, floor))
                out.append((s2, 1 - floor))
            out.append((site, 1 - floor))
        return out

    def occupied(nest):
        return nest in real_nests or nest in fict

    while True:
        k = len(real_nests) + len(fict)
        if k > max_size:
            truncated = True
            break
        total = k * (cstar + 2 * d * stir)
        if total <= 0:
            break
        clock += rng.exponential(1.0 / total)
        if clock >= t:
            break
        real_list = None
        if rng.random() * (cstar + 2 * d * stir) < cstar:
            branches += 1
            j = int(rng.integers(k))
            if j < len(fict):
                site, floor = fict[j]
                parent_fict = True
            else:
                real_list = sorted(real_nests)
                site, floor = real_list[j - len(fict)]
                parent_fict = False
            kids = children_of(site, floor)
            for nest in kids:
                hit = occupied(nest)
                if hit:
                    collisions += 1
                if parent_fict or hit:
                    fict.append(nest)
                else:
                    real_nests.add(nest)
        else:
            j = int(rng.integers(k))
            axis = int(rng.integers(d))
            off = [0] * d
            off[axis] = 1 if rng.random() < 0.5 else -1
            if j < len(fict):
                site, floor = fict[j]
                fict[j] = (torus.shift(site, tuple(off)), floor)
            else:
                real_list = sorted(real_nests)
                site, floor = real_list[j - len(fict)]
                dest = (torus.shift(site, tuple(off)), floor)
                if dest in real_nests:
                    # exchange: swap positions, set unchanged
                    continue
                real_nests.discard((site, floor))
                real_nests.add(dest)
    real = len(real_nests)
    return DualCloudStats(
        size=real + len(fict),
        real_size=real,
        collisions=collisions,
        branch_events=branches,
        truncated=truncated,
    )


# ---------------------------------------------------------------------------
# good-event block field (d = 1, no stirring, paired rule)


@dataclass
class GoodEventField:
    width: int
    height: int
    block_T: float
    gamma_hat: float
    omega: np.ndarray  # (height, 2*width+1); -1 off-parity, else 0/1
    V: list  # front sets per level (the comparison process)
    W: list  # open-front sets per level
    X: list  # particle (1,1)-site sets per level
    on_front_trials: int = 0
    on_front_good: int = 0
    no_death_trials: int = 0
    no_death_good: int = 0

    def dominated(self) -> bool:
        return all(v <= x for v, x in zip(self.V, self.X))


def good_event_probability(lam: float, delta: float, block_T: float) -> float:
    """Oracle: no deaths at six nests, and four required birth arrows fire."""
    return math.exp(-6.0 * delta * block_T) * (1.0 - math.exp(-lam * block_T)) ** 4


def good_event_field(
    params: IPSParams,
    torus: Torus,
    state0: LatticeState,
    block_T: float,
    width: int,
    height: int,
    seed: int,
) -> GoodEventField:
    """Run the particle system and mark per-block good events on the oriented grid.

    Block (x, n) is good when the log shows no death arrivals at the six
    nests of sites x-1, x, x+1 during [nT, (n+1)T) and, for each of the four
    nests at x-1 and x+1, a birth arrow with both parents at site x.  Fronts
    follow the comparison recursion: V_{n+1} collects the children of open
    sites of V_n; off-front sites get an independent Bernoulli(1 - gamma_hat)
    fill.  On a good block a front site's children are doubly occupied at the
    next block time, so V_n stays inside the particle system's (1,1) set X_n.
    """
    if torus.d != 1:
        raise PairpopError("good-event field is built on d = 1")
    if params.stirring != "none":
        raise PairpopError("good-event field needs stirring disabled")
    if params.birth_rule != PAIRED_ANYWHERE:
        raise PairpopError("good-event field uses the paired birth rule")
    log = GraphicalEventLog(seed, torus, params)
    sim = LatticeSimulation(params, log, state0, record_arrivals=True)
    n_side = torus.nsites
    center = n_side // 2

    snapshots = []
    for nlev in range(height + 1):
        sim.advance(nlev * block_T)
        snapshots.append((state0.male & state0.female).copy())

    arr = sim.arrival_record
    gamma_hat = 1.0 - good_event_probability(params.lam, params.delta, block_T)
    fill = np.random.Generator(np.random.Philox(key=_stream_key(seed, ("fill",))))

    # organize death and parents-at-one-site birth arrivals per (site, block)
    death_thr = params.delta / log.refs.delta_ref if log.refs.delta_ref > 0 else 0.0
    birth_thr = params.lam / log.refs.lam_ref if log.refs.lam_ref > 0 else 0.0
    deaths = {}
    arrows = {}
    for chan, t, u in arr:
        blk = int(t // block_T)
        if blk >= height:
            continue
        if chan[0] == "D" and u <= death_thr:
            deaths[(chan[1], blk)] = deaths.get((chan[1], blk), 0) + 1
        elif chan[0] == "B" and u <= birth_thr:
            _, site, m, i1, i2 = chan
            if i1 == i2:
                parent = torus.shift(site, params.neighborhood[i1])
                key = (site, m, parent, blk)
                arrows[key] = arrows.get(key, 0) + 1

    def site_of(x: int) -> int:
        return (center + x) % n_side

    def good(x: int, n: int) -> bool:
        for dx in (-1, 0, 1):
            if deaths.get((site_of(x + dx), n), 0):
                return False
        for dx in (-1, 1):
            for m in (0, 1):
                if not arrows.get((site_of(x + dx), m, site_of(x), n), 0):
                    return False
        return True

    def xset(level: int) -> set:
        both = snapshots[level]
        return {
            x
            for x in range(-width, width + 1)
            if (x + level) % 2 == 0 and both[site_of(x)]
        }

    omega = -np.ones((height, 2 * width + 1), dtype=np.int8)
    Xs = [xset(n) for n in range(height + 1)]
    V = [set(Xs[0])]
    Ws = []
    stats = dict(oft=0, ofg=0, ndt=0, ndg=0)
    for n in range(height):
        Vn = V[-1]
        Wn = set()
        for x in range(-width, width + 1):
            if (x + n) % 2 != 0:
                continue
            nd = all(not deaths.get((site_of(x + dx), n), 0) for dx in (-1, 0, 1))
            stats["ndt"] += 1
            stats["ndg"] += int(nd)
            if x in Vn:
                g = good(x, n)
                stats["oft"] += 1
                stats["ofg"] += int(g)
                w = 1 if g else 0
            else:
                w = 1 if fill.random() >= gamma_hat else 0
            omega[n, x + width] = w
            if x in Vn and w:
                Wn.add(x)
        Ws.append(Wn)
        nxt = set()
        for x in Wn:
            for child in (x - 1, x + 1):
                if -width <= child <= width:
                    nxt.add(child)
        V.append(nxt)
    return GoodEventField(
        width=width,
        height=height,
        block_T=block_T,
        gamma_hat=gamma_hat,
        omega=omega,
        V=V[:-1],
        W=Ws,
        X=Xs[:-1],
        on_front_trials=stats["oft"],
        on_front_good=stats["ofg"],
        no_death_trials=stats["ndt"],
        no_death_good=stats["ndg"],
    )
