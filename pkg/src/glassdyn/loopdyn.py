"""Loop dynamics on a square-lattice window.

Every enumerated dual loop carries a Poisson clock.  At a ring the loop's
energy ``H = -sum_{e crossed} J_e s_x s_y`` decides: positive flips every
enclosed spin, zero flips on a fair coin, negative does nothing.

Rates differ by many orders of magnitude across loop lengths, so almost all
rings are no-ops.  The engine only visits rings of loops whose energy is
non-negative.  That is exact because each loop has a random-access clock:
time is cut into blocks of expected ``BLOCK_RINGS`` rings, and the ring
times inside block ``b`` of loop ``i`` are a pure function of
``(seed, i, b)``, so the next ring after any time can be found directly.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .disorder import Coupling
from .graphs import PlanarWindow
from .loops import DualLoop, LoopType, canonical_form, enumerate_dual_loops, loop_types
from .rng import derive, generator, to_uniform

BLOCK_RINGS = 4.0
TIE_EPS = 1e-12


class DegenerateLoopError(RuntimeError):
    """A continuous-coupling run met a loop with vanishing energy."""


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class FrequencySchedule:
    c: float
    max_length: int
    rates: dict  # canonical form -> rate
    types: dict  # canonical form -> LoopType
    well_defined_sum: float  # sum over types of n * f * S
    decay_exponent: float
    decay_ratio: float  # max over (edge, l) of decay sum / exp(-decay_exponent * l)

    def rate(self, loop: DualLoop | LoopType) -> float:
        key = loop.canonical if isinstance(loop, LoopType) else canonical_form(loop.points)
        return self.rates.get(key, 0.0)


def default_rates(types: Iterable[LoopType], c: float) -> dict:
    types = list(types)
    per_length: dict[int, int] = {}
    for t in types:
        per_length[t.length] = per_length.get(t.length, 0) + 1
    return {t.canonical: math.exp(-c * t.length) / (t.n_at_origin * t.span * per_length[t.length]) for t in types}


def lattice_decay_sums(types: Iterable[LoopType], rates: dict) -> dict[int, float]:
    """For each l: summed rate of loops of length >= l crossing one fixed edge,
    on the full lattice.  A type with o orientations and length L contributes
    o * L / 2 loops through each edge."""
    types = list(types)
    lengths = sorted({t.length for t in types})
    out = {}
    for l in range(1, (max(lengths) if lengths else 0) + 1):
        out[l] = sum(t.orientations * t.length / 2 * rates[t.canonical] for t in types if t.length >= l)
    return out


def window_decay_sums(loops: Sequence[DualLoop], rates: Sequence[float]) -> dict[tuple[int, int], float]:
    """{(edge, l): summed rate of window loops of length >= l crossing edge}."""
    by_edge: dict[int, list[tuple[int, float]]] = {}
    for lp, f in zip(loops, rates):
        for e in lp.edges:
            by_edge.setdefault(e, []).append((lp.length, f))
    out = {}
    for e, items in by_edge.items():
        lmax = max(l for l, _ in items)
        for l in range(1, lmax + 1):
            out[(e, l)] = sum(f for ll, f in items if ll >= l)
    return out


def make_frequency_schedule(
    types: Iterable[LoopType] | dict,
    c: float = 10.0,
    *,
    rates: dict | None = None,
    decay_exponent: float = 10.0,
    window_loops: Sequence[DualLoop] | None = None,
) -> FrequencySchedule:
    """Proper rates for the given types, checked for a finite well-definedness
    sum and for the per-edge decay bound."""
    if c < 10:
        raise ScheduleError(f"decay constant c={c} is below 10")
    tlist = list(types.values()) if isinstance(types, dict) else list(types)
    if not tlist:
        raise ScheduleError("no loop types given")
    tmap = {t.canonical: t for t in tlist}
    rates = dict(rates) if rates is not None else default_rates(tlist, c)
    if set(rates) != set(tmap) or any(not (f >= 0 and math.isfinite(f)) for f in rates.values()):
        raise ScheduleError("rates must be finite, non-negative and given for every type")
    wd = sum(t.n_at_origin * rates[t.canonical] * t.span for t in tlist)
    if not math.isfinite(wd):
        raise ScheduleError("well-definedness sum diverges")
    sums = lattice_decay_sums(tlist, rates)
    ratio = max(s / math.exp(-decay_exponent * l) for l, s in sums.items())
    if window_loops is not None:
        wsums = window_decay_sums(window_loops, [rates[canonical_form(lp.points)] for lp in window_loops])
        ratio = max([ratio] + [s / math.exp(-decay_exponent * l) for (_, l), s in wsums.items()])
    if not ratio < 1:
        bad = [l for l, s in sums.items() if not s < math.exp(-decay_exponent * l)]
        raise ScheduleError(f"edge decay bound fails for l in {bad}")
    return FrequencySchedule(c, max(t.length for t in tlist), rates, tmap, wd, decay_exponent, ratio)


def decay_violations(types: Iterable[LoopType], rates: dict, decay_exponent: float = 10.0) -> list[int]:
    sums = lattice_decay_sums(types, rates)
    return [l for l, s in sums.items() if not s < math.exp(-decay_exponent * l)]


class BlockClock:
    """Random-access Poisson clock of one loop."""

    __slots__ = ("seed", "idx", "rate", "span", "_cache")

    def __init__(self, seed: int, idx: int, rate: float):
        self.seed = seed
        self.idx = idx
        self.rate = rate
        self.span = BLOCK_RINGS / rate if rate > 0 else math.inf
        self._cache: dict[int, list[float]] = {}

    def block(self, b: int) -> list[float]:
        got = self._cache.get(b)
        if got is not None:
            return got
        # Poisson count by inversion, then sorted uniform positions
        u = to_uniform(derive(self.seed, "loop-clock", self.idx, b))
        k, p = 0, math.exp(-BLOCK_RINGS)
        cdf = p
        while u > cdf and k < 200:
            k += 1
            p *= BLOCK_RINGS / k
            cdf += p
        start = b * self.span
        times = sorted(start + self.span * to_uniform(derive(self.seed, "loop-pick", self.idx, b, j))
                       for j in range(k))
        if len(self._cache) > 8:
            self._cache.clear()
        self._cache[b] = times
        return times

    def next_after(self, t: float) -> tuple[float, int, int]:
        """First ring strictly after ``t`` as (time, block, index)."""
        if self.rate <= 0:
            return math.inf, -1, -1
        b = max(0, int(t // self.span))
        while True:
            times = self.block(b)
            j = bisect.bisect_right(times, t)
            if j < len(times):
                return times[j], b, j
            b += 1

    def rings_between(self, a: float, z: float) -> int:
        """Number of rings in [a, z)."""
        if self.rate <= 0 or z <= a:
            return 0
        n = 0
        b = max(0, int(a // self.span))
        while b * self.span < z:
            for t in self.block(b):
                if a <= t < z:
                    n += 1
            b += 1
        return n

    def rings_in(self, a: float, z: float) -> bool:
        """Whether any ring falls in (a, z]."""
        return self.next_after(a)[0] <= z

    def coin(self, b: int, j: int) -> int:
        return 1 if derive(self.seed, "loop-coin", self.idx, b, j) >> 63 else -1


class LoopSystem:
    """Window, its enumerated loops, their rates and incidence tables."""

    def __init__(self, window: PlanarWindow, schedule: FrequencySchedule,
                 loops: Sequence[DualLoop] | None = None):
        self.window = window
        self.schedule = schedule
        self.loops = list(loops) if loops is not None else enumerate_dual_loops(window, schedule.max_length)
        self.keys = [canonical_form(lp.points) for lp in self.loops]
        self.rates = np.array([schedule.rates.get(k, 0.0) for k in self.keys])
        self.edge_loops: dict[int, list[int]] = {}
        self.vertex_loops: dict[int, list[int]] = {}
        for i, lp in enumerate(self.loops):
            for e in lp.edges:
                self.edge_loops.setdefault(e, []).append(i)
            for v in lp.span_set:
                self.vertex_loops.setdefault(v, []).append(i)

    @classmethod
    def build(cls, window: PlanarWindow, max_length: int = 8, c: float = 10.0, **kw) -> "LoopSystem":
        loops = enumerate_dual_loops(window, max_length)
        sched = make_frequency_schedule(loop_types(loops), c, window_loops=loops, **kw)
        return cls(window, sched, loops)

    @cached_property
    def total_rate(self) -> float:
        return float(self.rates.sum())

    def type_ids(self) -> dict:
        ids = {}
        for k in self.keys:
            ids.setdefault(k, len(ids))
        return ids


def loop_hamiltonian(sigma: Sequence[int], loop: DualLoop, coupling: Coupling,
                     window: PlanarWindow | None = None) -> float:
    """-sum of J s_x s_y over the primal edges crossed by ``loop``."""
    if window is not None and any(f >= window.n_faces for f in loop.faces):
        raise ValueError("loop touches the window boundary")
    g = coupling.graph
    total = 0.0
    for e in loop.edges:
        x, y = g.edges[e]
        total += coupling.values[e] * sigma[x] * sigma[y]
    return -total + 0.0


@dataclass
class LoopRunRecord:
    horizon: float
    seed: int
    sigma0: np.ndarray
    final: np.ndarray
    events_t: list[float]
    events_loop: list[int]
    events_h: list[float]
    events_action: list[str]  # "flip" (H > 0), "tie-flip", "tie-stay"
    vertex_flips: np.ndarray
    energy0: float
    energy_final: float
    positive_fraction: list[tuple[float, float]]
    history: list[list[tuple[float, float]]]  # per loop: (time from which, H)
    energy_monotone: bool
    keys: list = field(default_factory=list)
    truncated_at: float | None = None

    def flip_sequence(self) -> list[tuple[float, int]]:
        return [(t, i) for t, i, a in zip(self.events_t, self.events_loop, self.events_action) if a != "tie-stay"]

    @property
    def n_flips(self) -> int:
        return sum(a != "tie-stay" for a in self.events_action)

    def last_flip_time(self) -> float:
        ts = [t for t, a in zip(self.events_t, self.events_action) if a != "tie-stay"]
        return ts[-1] if ts else -math.inf


def run_loop_dynamics(
    system: LoopSystem,
    coupling: Coupling,
    sigma0: Sequence[int],
    horizon: float,
    seed: int,
    *,
    samples: int = 0,
    max_events: int | None = None,
) -> LoopRunRecord:
    """Run up to ``horizon``.  With ``max_events`` the run stops early once
    that many rings have been processed and ``truncated_at`` is set."""
    window = system.window
    g = window.graph
    loops = system.loops
    nl = len(loops)
    integral = coupling.integral
    J = [int(x) for x in coupling.values] if integral else [float(x) for x in coupling.values]
    s = [int(x) for x in sigma0]
    for v, val in window.pinned().items():
        s[v] = val
    sigma_start = np.array(s, dtype=np.int8)
    edges = g.edges
    loop_edges = [lp.edges for lp in loops]
    interiors = [tuple(lp.enclosed) for lp in loops]
    clocks = [BlockClock(seed, i, float(system.rates[i])) for i in range(nl)]

    def ham(i: int):
        tot = 0
        for e in loop_edges[i]:
            x, y = edges[e]
            tot += J[e] * s[x] * s[y]
        return -tot

    H = [ham(i) for i in range(nl)]
    history = [[(0.0, H[i])] for i in range(nl)]
    version = [0] * nl
    heap: list[tuple[float, int, int, int, int]] = []

    def schedule_next(i: int, t: float) -> None:
        tn, b, j = clocks[i].next_after(t)
        if tn <= horizon:
            heapq.heappush(heap, (tn, i, version[i], b, j))

    for i in range(nl):
        if H[i] >= 0 and system.rates[i] > 0:
            schedule_next(i, 0.0)
    e0 = float(sum(-J[k] * s[x] * s[y] for k, (x, y) in enumerate(edges)))
    energy = e0
    monotone = True
    n_pos = sum(1 for h in H if h > 0)
    grid = [horizon * (k + 1) / samples for k in range(samples)] if samples else []
    fractions: list[tuple[float, float]] = []
    gi = 0
    ev_t: list[float] = []
    ev_l: list[int] = []
    ev_h: list[float] = []
    ev_a: list[str] = []
    vflips = [0] * g.n

    truncated_at = None
    while heap:
        t, i, ver, b, j = heapq.heappop(heap)
        if ver != version[i]:
            continue
        if max_events is not None and len(ev_t) >= max_events:
            truncated_at = t
            break
        while gi < len(grid) and grid[gi] < t:
            fractions.append((grid[gi], n_pos / nl if nl else 0.0))
            gi += 1
        h = H[i]
        if not integral and abs(h) < TIE_EPS:
            raise DegenerateLoopError(f"loop {i} has |H| < {TIE_EPS} at t={t}")
        if h > 0:
            action = "flip"
        else:
            action = "tie-flip" if clocks[i].coin(b, j) > 0 else "tie-stay"
        ev_t.append(t)
        ev_l.append(i)
        ev_h.append(float(h))
        ev_a.append(action)
        if action == "tie-stay":
            schedule_next(i, t)
            continue
        for v in interiors[i]:
            s[v] = -s[v]
            vflips[v] += 1
        de = -2 * h
        if de > 0:
            monotone = False
        energy += de
        touched = set()
        for e in loop_edges[i]:
            touched.update(system.edge_loops[e])
        for k in touched:
            old = H[k]
            new = ham(k)
            if new == old:
                continue
            H[k] = new
            history[k].append((t, new))
            n_pos += (new > 0) - (old > 0)
            if (new >= 0) != (old >= 0) or k == i:
                version[k] += 1
                if new >= 0:
                    schedule_next(k, t)
        if H[i] >= 0 and version[i] == ver:
            # H unchanged in sign class (possible for ties): keep the clock going
            schedule_next(i, t)
    while gi < len(grid) and (truncated_at is None or grid[gi] < truncated_at):
        fractions.append((grid[gi], n_pos / nl if nl else 0.0))
        gi += 1
    return LoopRunRecord(
        horizon=horizon,
        seed=seed,
        sigma0=sigma_start,
        final=np.array(s, dtype=np.int8),
        events_t=ev_t,
        events_loop=ev_l,
        events_h=ev_h,
        events_action=ev_a,
        vertex_flips=np.array(vflips, dtype=np.int64),
        energy0=e0,
        energy_final=float(energy),
        positive_fraction=fractions,
        history=history,
        energy_monotone=monotone,
        keys=system.keys,
        truncated_at=truncated_at,
    )


def positive_loops(system: LoopSystem, coupling: Coupling, sigma: Sequence[int]) -> list[int]:
    """Indices of loops with H > 0 under ``sigma`` (exhaustive scan)."""
    return [i for i, lp in enumerate(system.loops) if loop_hamiltonian(sigma, lp, coupling) > 0]


def energy_accounting(record: LoopRunRecord, system: LoopSystem, loop_type: LoopType | tuple,
                      times: Sequence[float] | None = None) -> list[tuple[float, float]]:
    """Cumulative energy change from flips with H > 0 of loops of one type.

    Returns (time, cumulative change) at each such flip, or sampled at ``times``.
    """
    key = loop_type.canonical if isinstance(loop_type, LoopType) else tuple(loop_type)
    steps = [(0.0, 0.0)]
    acc = 0.0
    for t, i, h, a in zip(record.events_t, record.events_loop, record.events_h, record.events_action):
        if a == "flip" and system.keys[i] == key:
            acc += -2.0 * h
            steps.append((t, acc))
    if times is None:
        return steps
    out = []
    k = 0
    for tt in times:
        while k + 1 < len(steps) and steps[k + 1][0] <= tt:
            k += 1
        out.append((tt, steps[k][1]))
    return out


@dataclass(frozen=True)
class Margin:
    epsilon: float          # inf when no loop crossing the edge rang
    loop: int               # loop attaining the minimum, -1 if none
    h_value: float          # its energy in the attaining state
    sxsy: int               # s_x s_y on the edge in that state
    conservative: float     # min |H| over every state visited, rung or not


def _edge_product_at(record: LoopRunRecord, system: LoopSystem, x: int, y: int, t: float) -> int:
    """s_x s_y just after time t, by replaying flips."""
    sx, sy = int(record.sigma0[x]), int(record.sigma0[y])
    for tt, i, a in zip(record.events_t, record.events_loop, record.events_action):
        if tt > t:
            break
        if a == "tie-stay":
            continue
        inside = system.loops[i].enclosed
        if x in inside:
            sx = -sx
        if y in inside:
            sy = -sy
    return sx * sy


def perturbation_margin(record: LoopRunRecord, system: LoopSystem, edge: int) -> Margin:
    """Smallest |H| over states in which a loop crossing ``edge`` actually rang.

    Shifting J_edge by less than this cannot change any decision taken at a
    ring, so a replay reproduces the flip sequence exactly.
    """
    best = (math.inf, -1, 0.0, 0.0)
    cons = math.inf
    for i in system.edge_loops.get(edge, []):
        hist = record.history[i]
        clock = BlockClock(record.seed, i, float(system.rates[i]))
        for k, (t0, h) in enumerate(hist):
            t1 = hist[k + 1][0] if k + 1 < len(hist) else record.horizon
            cons = min(cons, abs(h))
            if abs(h) >= best[0]:
                continue
            # a state entered at t0 by a flip is seen by rings strictly after t0
            if clock.rings_in(t0, t1):
                best = (abs(h), i, float(h), t0)
    if best[1] < 0:
        return Margin(math.inf, -1, 0.0, 0, cons)
    x, y = system.window.graph.edges[edge]
    sxsy = _edge_product_at(record, system, x, y, best[3])
    return Margin(best[0], best[1], best[2], sxsy, cons)


def replay_with_shift(system: LoopSystem, coupling: Coupling, record: LoopRunRecord, edge: int,
                      delta: float) -> LoopRunRecord:
    shifted = coupling.with_value(edge, float(coupling.values[edge]) + delta)
    return run_loop_dynamics(system, shifted, record.sigma0, record.horizon, record.seed)


def crossing_shift(margin: Margin, factor: float = 1.1) -> float:
    """Shift of J_edge that moves the attaining loop energy across zero.

    H changes by -delta * s_x s_y, so delta = factor * H * s_x s_y.
    """
    return factor * margin.h_value * margin.sxsy


@dataclass(frozen=True)
class DependencyCluster:
    vertices: frozenset[int]
    budget: float
    subcritical: bool
    rings: int


def gw_budget(schedule: FrequencySchedule, tau: float) -> float:
    return tau * schedule.well_defined_sum


def dependency_cluster(system: LoopSystem, tau: float, seed: int, vertex: int) -> DependencyCluster:
    """Closure of ``{vertex}`` under loops that ring before ``tau``.

    Rings before tau are drawn from the aggregate rate and attributed to loops
    proportionally to their rates.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    rng = generator(seed, "choice")
    total = system.total_rate
    n = rng.poisson(tau * total) if total > 0 else 0
    rung = set()
    if n:
        cum = np.cumsum(system.rates)
        picks = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
        rung = set(int(i) for i in picks)
    D = {vertex}
    frontier = [vertex]
    while frontier:
        v = frontier.pop()
        for i in system.vertex_loops.get(v, []):
            if i in rung:
                for w in system.loops[i].span_set:
                    if w not in D:
                        D.add(w)
                        frontier.append(w)
    b = gw_budget(system.schedule, tau)
    return DependencyCluster(frozenset(D), b, b < 1, len(rung))
