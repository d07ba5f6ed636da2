"""Event-driven zero-temperature Glauber dynamics.

Each unpinned vertex carries a rate-1 Poisson clock and a coin sequence.  At a
ring the vertex takes the sign of its local field ``h_v = sum_w J_vw s_w``;
when the field vanishes it takes the value of that ring's coin.  This is the
same law as "flip on energy decrease, toss a fair coin on a tie", and it
makes runs from ordered initial states stay ordered under a shared stream.

Clock and coin streams are keyed by vertex, so a run on a subgraph that
reuses the parent's keys sees exactly the parent's rings and coins.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .disorder import Coupling
from .graphs import Graph
from .rng import generator, replica_seed

CHUNK = 256
TIE_EPS = 1e-12


class DegenerateCouplingError(RuntimeError):
    """A continuous-coupling run hit an exact energy tie."""


@dataclass(frozen=True)
class BoundaryCondition:
    pinned: Mapping[int, int] = field(default_factory=dict)

    @classmethod
    def from_values(cls, vertices: Iterable[int], values: Sequence[int] | int) -> "BoundaryCondition":
        vs = list(vertices)
        vals = [values] * len(vs) if isinstance(values, int) else list(values)
        return cls({int(v): int(s) for v, s in zip(vs, vals)})

    def __contains__(self, v: int) -> bool:
        return v in self.pinned

    def leq(self, other: "BoundaryCondition") -> bool:
        return set(self.pinned) == set(other.pinned) and all(
            self.pinned[v] <= other.pinned[v] for v in self.pinned
        )


class EventStream:
    """Per-clock Poisson ring times and coins, reproducible from a seed.

    Ring ``k`` of clock ``key`` lives in chunk ``k // 256``; each chunk is drawn
    from its own derived generator, so ring times never depend on the horizon.
    """

    def __init__(self, seed: int, rate: float = 1.0, keys: Sequence[int] | None = None,
                 purpose: tuple[str, str] = ("clocks", "coins")):
        self.seed = int(seed)
        self.rate = float(rate)
        self.keys = None if keys is None else list(keys)
        self.purpose = purpose

    def key(self, v: int) -> int:
        return v if self.keys is None else self.keys[v]

    def increments(self, key: int, chunk: int) -> np.ndarray:
        return generator(self.seed, self.purpose[0], key, chunk).standard_exponential(CHUNK) / self.rate

    def coins(self, key: int, chunk: int) -> np.ndarray:
        return generator(self.seed, self.purpose[1], key, chunk).integers(0, 2, CHUNK) * 2 - 1

    def clock(self, v: int) -> "Clock":
        return Clock(self, self.key(v))

    def ring_times(self, v: int, horizon: float) -> list[float]:
        c = self.clock(v)
        out = []
        while c.time <= horizon:
            out.append(c.time)
            c.advance()
        return out

    def coin(self, v: int, k: int) -> int:
        """Coin attached to ring ``k`` (0-based) of vertex ``v``."""
        return int(self.coins(self.key(v), k // CHUNK)[k % CHUNK])

    def restricted(self, keys: Sequence[int]) -> "EventStream":
        """Stream for a subgraph whose vertex ``i`` is parent vertex ``keys[i]``."""
        return EventStream(self.seed, self.rate, [self.key(k) for k in keys], self.purpose)


class Clock:
    __slots__ = ("stream", "key", "k", "chunk", "times", "coins", "time")

    def __init__(self, stream: EventStream, key: int):
        self.stream = stream
        self.key = key
        self.k = 0
        self.chunk = 0
        self.times = np.cumsum(stream.increments(key, 0)).tolist()
        self.coins = stream.coins(key, 0).tolist()
        self.time = self.times[0]

    def coin(self) -> int:
        return self.coins[self.k % CHUNK]

    def advance(self) -> float:
        self.k += 1
        i = self.k % CHUNK
        if i == 0:
            self.chunk += 1
            base = self.times[-1]
            self.times = (base + np.cumsum(self.stream.increments(self.key, self.chunk))).tolist()
            self.coins = self.stream.coins(self.key, self.chunk).tolist()
        self.time = self.times[i]
        return self.time


def energy(graph: Graph, coupling: Coupling, sigma: Sequence[int]) -> float:
    s = np.asarray(sigma, dtype=float)
    e = graph.edge_array
    if len(e) == 0:
        return 0.0
    return float(-np.sum(coupling.values * s[e[:, 0]] * s[e[:, 1]]))


def local_field(graph: Graph, coupling: Coupling, sigma: Sequence[int], v: int) -> float:
    vals = coupling.values
    return float(sum(vals[graph.edge_id(v, w)] * sigma[w] for w in graph.neighbors[v]))


def delta_h(sigma: Sequence[int], vertex: int, coupling: Coupling, bc: BoundaryCondition | None = None) -> float:
    """Energy change from flipping ``vertex``: 2 s_v sum_w J_vw s_w."""
    if bc is not None and vertex in bc:
        raise ValueError(f"vertex {vertex} is pinned")
    h = local_field(coupling.graph, coupling, sigma, vertex)
    val = 2.0 * sigma[vertex] * h
    return val + 0.0  # normalize -0.0


@dataclass
class RunRecord:
    graph: Graph
    horizon: float
    seed: int
    sigma0: np.ndarray
    final: np.ndarray
    events_t: list[float]
    events_v: list[int]
    events_dh: list[float]
    flips: np.ndarray
    energy_reducing: np.ndarray
    last_flip: np.ndarray
    rings: np.ndarray
    first_ring: np.ndarray
    energy0: float
    pinned: frozenset[int]
    ring_log: dict[int, list[tuple[float, float, int, bool]]] = field(default_factory=dict)
    absorbed_at: float | None = None

    @property
    def n_events(self) -> int:
        return len(self.events_t)

    def energy_trace(self) -> list[tuple[float, float]]:
        out = [(0.0, self.energy0)]
        e = self.energy0
        for t, dh in zip(self.events_t, self.events_dh):
            e += dh
            out.append((t, e))
        return out

    @property
    def energy_final(self) -> float:
        return self.energy0 + float(sum(self.events_dh))

    def flip_sequence(self) -> list[tuple[float, int]]:
        return list(zip(self.events_t, self.events_v))


class _Engine:
    """Spin state, local fields and active-vertex bookkeeping for one configuration."""

    def __init__(self, graph: Graph, coupling: Coupling, sigma0: Sequence[int], pinned: Mapping[int, int],
                 watch: Iterable[int] = ()):
        n = graph.n
        self.graph = graph
        self.integral = coupling.integral
        vals = coupling.values
        self.adj: list[list[tuple[int, float]]] = [
            [(w, (int(vals[graph.edge_id(v, w)]) if self.integral else float(vals[graph.edge_id(v, w)])))
             for w in graph.neighbors[v]]
            for v in range(n)
        ]
        s = [int(x) for x in sigma0]
        if len(s) != n or any(x not in (-1, 1) for x in s):
            raise ValueError("sigma0 must assign +-1 to every vertex")
        for u, val in pinned.items():
            s[u] = int(val)
        self.sigma0 = np.array(s, dtype=np.int8)
        self.s = s
        self.pinned = frozenset(pinned)
        self.h = [sum(J * s[w] for w, J in self.adj[v]) for v in range(n)]
        self.free = [v not in self.pinned for v in range(n)]
        self.active_flag = [self.free[v] and s[v] * self.h[v] <= 0 for v in range(n)]
        self.n_active = sum(self.active_flag)
        self.energy0 = -sum(s[v] * self.h[v] for v in range(n)) / 2
        self.events_t: list[float] = []
        self.events_v: list[int] = []
        self.events_dh: list[float] = []
        self.flips = [0] * n
        self.reducing = [0] * n
        self.last = [math.nan] * n
        self.watch = {int(v): [] for v in watch}

    def ring(self, v: int, t: float, coin: int) -> bool:
        s = self.s
        if self.integral:
            h = self.h[v]
        else:
            h = sum(J * s[w] for w, J in self.adj[v])
            if abs(h) < TIE_EPS / 2:
                raise DegenerateCouplingError(f"energy tie at vertex {v}, t={t}")
        old = s[v]
        new = (1 if h > 0 else -1) if h != 0 else coin
        flipped = new != old
        dh = 2 * old * h
        log = self.watch.get(v)
        if log is not None:
            log.append((t, float(dh) + 0.0, coin, flipped))
        if not flipped:
            return False
        s[v] = new
        self.events_t.append(t)
        self.events_v.append(v)
        self.events_dh.append(float(dh))
        self.flips[v] += 1
        if dh != 0:
            self.reducing[v] += 1
        self.last[v] = t
        self._refresh(v)
        diff = new - old
        hs = self.h
        for w, J in self.adj[v]:
            hs[w] += J * diff
            self._refresh(w)
        return True

    def _refresh(self, v: int) -> None:
        if not self.free[v]:
            return
        a = self.s[v] * self.h[v] <= 0
        if a != self.active_flag[v]:
            self.active_flag[v] = a
            self.n_active += 1 if a else -1

    def record(self, horizon: float, seed: int, rings: list[int], first: list[float],
               absorbed_at: float | None) -> RunRecord:
        return RunRecord(
            graph=self.graph,
            horizon=horizon,
            seed=seed,
            sigma0=self.sigma0,
            final=np.array(self.s, dtype=np.int8),
            events_t=self.events_t,
            events_v=self.events_v,
            events_dh=self.events_dh,
            flips=np.array(self.flips, dtype=np.int64),
            energy_reducing=np.array(self.reducing, dtype=np.int64),
            last_flip=np.array(self.last, dtype=float),
            rings=np.array(rings, dtype=np.int64),
            first_ring=np.array(first, dtype=float),
            energy0=float(self.energy0),
            pinned=self.pinned,
            ring_log=self.watch,
            absorbed_at=absorbed_at,
        )


def _drive(engines: list[_Engine], stream: EventStream, horizon: float, stop_when_absorbed: bool,
           on_event=None) -> tuple[list[int], list[float], float | None]:
    g = engines[0].graph
    free = [v for v in range(g.n) if engines[0].free[v]]
    rings = [0] * g.n
    first = [math.nan] * g.n
    clocks = {v: stream.clock(v) for v in free}
    heap = [(clocks[v].time, v) for v in free]
    heapq.heapify(heap)
    absorbed_at = None
    if stop_when_absorbed and all(e.n_active == 0 for e in engines):
        return rings, first, 0.0
    while heap:
        t, v = heap[0]
        if t > horizon:
            break
        c = clocks[v]
        coin = c.coin()
        if rings[v] == 0:
            first[v] = t
        rings[v] += 1
        changed = False
        for e in engines:
            changed |= e.ring(v, t, coin)
        if on_event is not None and changed:
            on_event(t, v)
        heapq.heapreplace(heap, (c.advance(), v))
        if changed and stop_when_absorbed and all(e.n_active == 0 for e in engines):
            absorbed_at = t
            break
    return rings, first, absorbed_at


def _pinned_of(bc: BoundaryCondition | Mapping[int, int] | None) -> dict[int, int]:
    if bc is None:
        return {}
    if isinstance(bc, BoundaryCondition):
        return dict(bc.pinned)
    return dict(bc)


def run_glauber(
    graph: Graph,
    coupling: Coupling,
    sigma0: Sequence[int],
    bc: BoundaryCondition | Mapping[int, int] | None = None,
    horizon: float = 1.0,
    seed: int = 0,
    *,
    watch: Iterable[int] = (),
    stream: EventStream | None = None,
    stop_when_absorbed: bool = True,
) -> RunRecord:
    """Run the dynamics up to ``horizon``.

    With ``stop_when_absorbed`` the run ends once no vertex can change at any
    future ring; ``absorbed_at`` is then set and ring counters stop there.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    stream = stream or EventStream(seed)
    eng = _Engine(graph, coupling, sigma0, _pinned_of(bc), watch)
    rings, first, absorbed = _drive([eng], stream, horizon, stop_when_absorbed)
    return eng.record(horizon, stream.seed, rings, first, absorbed)


def run_coupled_monotone(
    graph: Graph,
    coupling: Coupling,
    sigma_low: Sequence[int],
    sigma_high: Sequence[int],
    bc_low: BoundaryCondition | None = None,
    bc_high: BoundaryCondition | None = None,
    horizon: float = 1.0,
    seed: int = 0,
) -> tuple[RunRecord, RunRecord, int]:
    """Two runs on one event stream; returns both records and the number of
    events after which the pointwise order failed."""
    if np.any(coupling.values < 0):
        raise ValueError("monotone coupling needs ferromagnetic couplings")
    lo, hi = np.asarray(sigma_low), np.asarray(sigma_high)
    bl, bh = bc_low or BoundaryCondition(), bc_high or BoundaryCondition()
    if np.any(lo > hi) or not bl.leq(bh):
        raise ValueError("initial states or boundary values are not ordered")
    stream = EventStream(seed)
    a = _Engine(graph, coupling, lo, dict(bl.pinned))
    b = _Engine(graph, coupling, hi, dict(bh.pinned))
    violations = 0

    def check(t: float, v: int) -> None:
        nonlocal violations
        # only v changed, so the order can only fail at v
        if a.s[v] > b.s[v]:
            violations += 1

    rings, first, absorbed = _drive([a, b], stream, horizon, True, check)
    return (a.record(horizon, seed, rings, first, absorbed),
            b.record(horizon, seed, rings, first, absorbed), violations)


def count_order_violations(low: RunRecord, high: RunRecord) -> int:
    """Replay two records event by event and count states where low > high somewhere."""
    a = low.sigma0.astype(int).copy()
    b = high.sigma0.astype(int).copy()
    ev = sorted([(t, 0, v) for t, v in zip(low.events_t, low.events_v)]
                + [(t, 1, v) for t, v in zip(high.events_t, high.events_v)])
    bad = int(np.any(a > b))
    i = 0
    while i < len(ev):
        t = ev[i][0]
        while i < len(ev) and ev[i][0] == t:
            _, which, v = ev[i]
            (a if which == 0 else b)[v] *= -1
            i += 1
        bad += int(np.any(a > b))
    return bad


@dataclass(frozen=True)
class FreezingReport:
    label: str
    quiet: np.ndarray
    active: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    slice_constant: bool | None
    trailing_fraction: float
    tag: str = "HEURISTIC"


def _slice_constant(graph: Graph, sigma: np.ndarray) -> bool | None:
    levels = graph.labels.get("level")
    if levels is None:
        return None
    seen: dict[int, int] = {}
    for v, lev in enumerate(levels):
        if seen.setdefault(lev, int(sigma[v])) != int(sigma[v]):
            return False
    return True


def classify_freezing(record: RunRecord, trailing_fraction: float) -> FreezingReport:
    if not 0 < trailing_fraction < 1:
        raise ValueError("trailing fraction must lie in (0, 1)")
    cut = record.horizon * (1 - trailing_fraction)
    last = np.nan_to_num(record.last_flip, nan=-1.0)
    quiet = last < cut
    active = tuple(int(v) for v in np.flatnonzero(~quiet))
    comps = tuple(tuple(c) for c in record.graph.components(active)) if active else ()
    sc = _slice_constant(record.graph, record.final)
    if active:
        label = "active"
    elif sc:
        label = "all-quiet-slice-constant"
    else:
        label = "all-quiet"
    return FreezingReport(label, quiet, active, comps, sc, trailing_fraction)


@dataclass(frozen=True)
class PSFEstimate:
    result: bool
    trials: int
    witness: tuple[int, int] | None  # (trial, sign) of the first flipping trial
    tag: str = "ESTIMATE"


def is_psf_estimate(graph: Graph, coupling: Coupling, subset: Iterable[int], trials: int,
                    horizon: float, seed: int, bc: BoundaryCondition | None = None) -> PSFEstimate:
    """Start ``subset`` monochromatic (each sign), the rest random; check it never flips."""
    sub = sorted(set(subset))
    if not sub:
        raise ValueError("subset must be nonempty")
    for t in range(trials):
        rs = replica_seed(seed, t)
        rest = generator(rs, "spins").integers(0, 2, graph.n) * 2 - 1
        for sign in (1, -1):
            s0 = rest.copy()
            s0[sub] = sign
            rec = run_glauber(graph, coupling, s0, bc, horizon, rs)
            if rec.flips[sub].any():
                return PSFEstimate(False, t + 1, (t, sign))
    return PSFEstimate(True, trials, None)


def random_spins(n: int, seed: int, counter: int = 0) -> np.ndarray:
    return (generator(seed, "spins", counter).integers(0, 2, n) * 2 - 1).astype(np.int8)


def strongly_freezing_probability(graph: Graph, d: int, samples: int, seed: int,
                                  batch: int = 2000) -> tuple[float, float]:
    """Fraction of i.i.d. symmetric configurations where every vertex has at
    least d+1 more neighbors of one common sign; returns (estimate, stderr)."""
    from scipy.sparse import coo_matrix

    e = graph.edge_array
    adj = coo_matrix((np.ones(2 * len(e)), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])),
                     shape=(graph.n, graph.n)).tocsr()
    hits = 0
    done = 0
    k = 0
    while done < samples:
        b = min(batch, samples - done)
        s = generator(seed, "spins", k).integers(0, 2, (graph.n, b)) * 2 - 1
        field_ = adj @ s
        ok = np.all(field_ >= d + 1, axis=0) | np.all(field_ <= -(d + 1), axis=0)
        hits += int(ok.sum())
        done += b
        k += 1
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 0.0) / samples)


def good_slice_violations(record: RunRecord, slice_of: Sequence[int], d: int) -> int:
    """Check the dominant-sign mechanism on slices that start strongly biased.

    For every slice whose initial state gives each vertex at least d+1 more
    in-slice neighbors of the dominant sign: dominant vertices never flip and
    minority vertices flip exactly once, at their first ring.  Returns the
    number of offending vertices.
    """
    g = record.graph
    s0 = record.sigma0.astype(int)
    groups: dict[int, list[int]] = {}
    for v, k in enumerate(slice_of):
        groups.setdefault(k, []).append(v)
    bad = 0
    for verts in groups.values():
        vs = set(verts)
        inside = {v: sum(s0[w] for w in g.neighbors[v] if w in vs) for v in verts}
        for sign in (1, -1):
            if all(sign * inside[v] >= d + 1 for v in verts):
                break
        else:
            continue
        for v in verts:
            if v in record.pinned:
                continue
            if s0[v] == sign:
                bad += int(record.flips[v] != 0)
            elif record.rings[v] > 0:
                ok = record.flips[v] == 1 and record.last_flip[v] == record.first_ring[v]
                bad += int(not ok)
    return bad
