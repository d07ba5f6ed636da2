"""Exact and local ground states, unsatisfied-edge forests, domain walls, tree constructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .disorder import Coupling
from .graphs import Graph, PlanarWindow
from .rng import derive

ENERGY_TOL = 1e-12
MAX_SCAN_VERTICES = 30
SUBSET_BUDGET = 10_000_000


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class GroundStateReport:
    energy: float
    minimizers: list[np.ndarray]  # one representative per global-flip pair, vertex 0 = +1
    degenerate: bool
    unsatisfied: list[list[int]]  # per minimizer, edge ids with J s s < 0
    notion: str = "global-minimum"
    flags: dict = field(default_factory=dict)


def _spin_block(n: int, start: int, count: int) -> np.ndarray:
    """Spins for configuration indices start..start+count-1, vertex 0 fixed to +1."""
    idx = np.arange(start, start + count, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, dtype=np.int64)[None, :]) & 1
    s = np.ones((count, n), dtype=np.int8)
    s[:, 1:] = 1 - 2 * bits
    return s


def enumerate_ground_states(graph: Graph, coupling: Coupling, max_vertices: int = MAX_SCAN_VERTICES,
                            chunk: int = 1 << 16) -> GroundStateReport:
    """Exhaustive scan over all configurations modulo the global flip."""
    n = graph.n
    if n > max_vertices:
        raise BudgetExceeded(f"{n} vertices exceed the scan guard of {max_vertices}")
    if n == 0:
        return GroundStateReport(0.0, [], False, [])
    e = graph.edge_array
    J = coupling.values.astype(float)
    total = 1 << (n - 1)
    best = np.inf
    found: list[np.ndarray] = []
    for start in range(0, total, chunk):
        cnt = min(chunk, total - start)
        s = _spin_block(n, start, cnt).astype(np.int64)
        if len(e):
            en = -(s[:, e[:, 0]] * s[:, e[:, 1]]) @ J
        else:
            en = np.zeros(cnt)
        m = en.min()
        if m < best - ENERGY_TOL:
            best = m
            found = [s[i] for i in np.flatnonzero(en <= best + ENERGY_TOL)]
        elif m <= best + ENERGY_TOL:
            found.extend(s[i] for i in np.flatnonzero(en <= best + ENERGY_TOL))
    found = [f.astype(np.int8) for f in found]
    unsat = [unsatisfied_edges(graph, coupling, f) for f in found]
    return GroundStateReport(float(best), found, len(found) > 1, unsat)


def unsatisfied_edges(graph: Graph, coupling: Coupling, sigma: Sequence[int]) -> list[int]:
    s = np.asarray(sigma, dtype=float)
    e = graph.edge_array
    if len(e) == 0:
        return []
    val = coupling.values * s[e[:, 0]] * s[e[:, 1]]
    return [int(i) for i in np.flatnonzero(val < 0)]


def connected_subsets(graph: Graph, K: int, allowed: Sequence[bool] | None = None,
                      roots: Sequence[int] | None = None,
                      weights: Mapping[int, Mapping[int, float]] | None = None) -> Iterator[tuple[tuple[int, ...], float]]:
    """Connected vertex sets of size <= K, each yielded once.

    Uses ESU growth: every set is reached from its smallest vertex.  With
    ``roots`` given, only sets containing one of those roots as their smallest
    allowed vertex are produced.  ``weights[v][w]`` are per-edge values; the
    second item yielded is their sum over the set's boundary edges.
    """
    n = graph.n
    ok = [True] * n if allowed is None else list(allowed)
    nb = graph.neighbors
    if weights is None:
        weights = {v: {w: 1.0 for w in nb[v]} for v in range(n)}
    wsum = [sum(weights[v].values()) for v in range(n)]
    starts = range(n) if roots is None else roots

    def extend(sub: list[int], subset: set[int], near: set[int], ext: list[int], v: int, bsum: float):
        yield tuple(sub), bsum
        if len(sub) == K:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            new_ext = list(ext)
            for u in nb[w]:
                if u > v and ok[u] and u not in subset and u not in near:
                    new_ext.append(u)
            inner = sum(weights[w][u] for u in nb[w] if u in subset)
            nb_added = [u for u in nb[w] if u not in near]
            near.update(nb_added)
            subset.add(w)
            sub.append(w)
            yield from extend(sub, subset, near, new_ext, v, bsum + wsum[w] - 2 * inner)
            sub.pop()
            subset.discard(w)
            near.difference_update(nb_added)

    for v in starts:
        if not ok[v]:
            continue
        near = set(nb[v]) | {v}
        ext = [u for u in nb[v] if u > v and ok[u]]
        yield from extend([v], {v}, near, ext, v, wsum[v])


@dataclass(frozen=True)
class LocalCheck:
    passed: bool
    witness: tuple[int, ...] | None
    subsets_checked: int
    K: int
    notion: str = "K-local"


def verify_local_ground_state(sigma: Sequence[int], coupling: Coupling, graph: Graph, K: int,
                              pinned: Sequence[int] = (), budget: int = SUBSET_BUDGET) -> LocalCheck:
    """Check that flipping any connected unpinned set of size <= K does not lower the energy."""
    if K < 1:
        raise ValueError("K must be >= 1")
    s = [int(x) for x in sigma]
    weights = {v: {w: float(coupling.values[graph.edge_id(v, w)]) * s[v] * s[w] for w in graph.neighbors[v]}
               for v in range(graph.n)}
    pin = set(int(p) for p in pinned)
    allowed = [v not in pin for v in range(graph.n)]
    count = 0
    for sub, bsum in connected_subsets(graph, K, allowed, weights=weights):
        count += 1
        if count > budget:
            raise BudgetExceeded(f"more than {budget} subsets")
        if bsum < -ENERGY_TOL:
            return LocalCheck(False, tuple(sorted(sub)), count, K)
    return LocalCheck(True, None, count, K)


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


@dataclass(frozen=True)
class UnsatForest:
    edges: tuple[int, ...]            # primal edge ids
    dual: tuple[tuple[int, int], ...]  # face pairs, outer face included
    forest: bool
    cycle_edge: int | None            # first edge closing a dual cycle


def unsatisfied_subgraph(sigma: Sequence[int], coupling: Coupling, window: PlanarWindow) -> UnsatForest:
    g = window.graph
    edges = unsatisfied_edges(g, coupling, sigma)
    nf = window.n_faces + (0 if window.boundary == "periodic" else 1)
    dsu = _DSU(nf)
    closing = None
    for e in edges:
        a, b = window.dual_edges[e]
        if not dsu.union(a, b) and closing is None:
            closing = e
    return UnsatForest(tuple(edges), tuple(window.dual_edges[e] for e in edges), closing is None, closing)


@dataclass(frozen=True)
class FrustrationCheck:
    frustrated: tuple[int, ...]
    invariant: bool


def plaquette_frustration_check(coupling: Coupling, window: PlanarWindow) -> FrustrationCheck:
    """Faces with negative coupling product; each must leave an unsatisfied
    edge under all 16 local spin patterns."""
    out = []
    ok = True
    g = window.graph
    for f in range(window.n_faces):
        fe = window.face_edges(f)
        if np.prod(np.sign(coupling.values[list(fe)])) >= 0:
            continue
        out.append(f)
        corners = window.face_vertices(f)
        pos = {v: k for k, v in enumerate(corners)}
        for pattern in range(16):
            spins = [1 - 2 * ((pattern >> k) & 1) for k in range(4)]
            if not any(coupling.values[e] * spins[pos[g.edges[e][0]]] * spins[pos[g.edges[e][1]]] < 0 for e in fe):
                ok = False
    return FrustrationCheck(tuple(out), ok)


@dataclass(frozen=True)
class WallComponent:
    edges: tuple[int, ...]
    kind: str  # closed-loop, boundary-to-boundary, boundary-to-interior
    boundary_ends: int


@dataclass(frozen=True)
class DomainWall:
    edges: tuple[int, ...]
    components: tuple[WallComponent, ...]

    @property
    def has_closed_loop(self) -> bool:
        return any(c.kind == "closed-loop" for c in self.components)


def domain_walls(sigma_a: Sequence[int], sigma_b: Sequence[int], window: PlanarWindow) -> DomainWall:
    """Dual edges whose primal edge value s_x s_y differs between the two states."""
    g = window.graph
    a = np.asarray(sigma_a)
    b = np.asarray(sigma_b)
    e = g.edge_array
    diff = (a[e[:, 0]] * a[e[:, 1]]) != (b[e[:, 0]] * b[e[:, 1]])
    wall = [int(i) for i in np.flatnonzero(diff)]
    outer = window.outer_face
    # every crossing into the outer face gets its own stub node
    node_of: dict[tuple[str, int], int] = {}

    def node(key):
        return node_of.setdefault(key, len(node_of))

    ends = []
    for i in wall:
        f1, f2 = window.dual_edges[i]
        n1 = node(("stub", i)) if f1 == outer else node(("face", f1))
        n2 = node(("stub", i)) if f2 == outer else node(("face", f2))
        ends.append((n1, n2))
    dsu = _DSU(len(node_of))
    for n1, n2 in ends:
        dsu.union(n1, n2)
    groups: dict[int, list[int]] = {}
    for k, (n1, _) in enumerate(ends):
        groups.setdefault(dsu.find(n1), []).append(k)
    stubs = {nid for key, nid in node_of.items() if key[0] == "stub"}
    comps = []
    for ks in groups.values():
        nodes = set()
        deg: dict[int, int] = {}
        for k in ks:
            for x in ends[k]:
                nodes.add(x)
                deg[x] = deg.get(x, 0) + 1
        nstub = sum(1 for x in nodes if x in stubs)
        loose = sum(1 for x in nodes if x not in stubs and deg[x] % 2 == 1)
        if nstub == 0 and loose == 0:
            kind = "closed-loop"
        elif nstub >= 2 and loose == 0:
            kind = "boundary-to-boundary"
        else:
            kind = "boundary-to-interior"
        comps.append(WallComponent(tuple(sorted(wall[k] for k in ks)), kind, nstub))
    comps.sort(key=lambda c: c.edges)
    return DomainWall(tuple(wall), tuple(comps))


def _require_tree(tree: Graph) -> None:
    if tree.m != tree.n - 1 or not tree.is_connected():
        raise ValueError("input graph is not a tree")


def satisfied_tree_config(tree: Graph, coupling: Coupling, flipped_edges: Sequence[int] = (),
                          root: int = 0) -> np.ndarray:
    """Configuration satisfying every tree edge except ``flipped_edges``, root +1."""
    bad = set(flipped_edges)
    s = np.zeros(tree.n, dtype=np.int8)
    s[root] = 1
    stack = [root]
    while stack:
        u = stack.pop()
        for w in tree.neighbors[u]:
            if s[w] == 0:
                e = tree.edge_id(u, w)
                sign = 1 if coupling.values[e] > 0 else -1
                s[w] = s[u] * sign * (-1 if e in bad else 1)
                stack.append(w)
    return s


def _leaves(tree: Graph) -> list[int]:
    return [v for v in range(tree.n) if tree.degree(v) == 1]


@dataclass(frozen=True)
class TreeFlipResult:
    config: np.ndarray
    edge: int
    check: LocalCheck


def construct_tree_flip_gsp(tree: Graph, coupling: Coupling, h: float, K: int) -> TreeFlipResult | None:
    """Unsatisfy one light edge bridging two heavy clusters that both reach the leaves."""
    _require_tree(tree)
    if not h > 0:
        raise ValueError("h must be positive")
    leaves = set(_leaves(tree))
    a = np.abs(coupling.values)
    dsu = _DSU(tree.n)
    for k, (u, v) in enumerate(tree.edges):
        if a[k] >= h:
            dsu.union(u, v)
    reach = {dsu.find(v) for v in leaves}
    order = _bfs_order(tree)
    depth = {v: i for i, v in enumerate(order)}
    candidates = []
    for k, (u, v) in enumerate(tree.edges):
        if a[k] >= h or u in leaves or v in leaves:
            continue
        if dsu.find(u) in reach and dsu.find(v) in reach:
            candidates.append((min(depth[u], depth[v]), k))
    if not candidates:
        return None
    _, edge = min(candidates)
    cfg = satisfied_tree_config(tree, coupling, [edge])
    check = verify_local_ground_state(cfg, coupling, tree, K, pinned=sorted(leaves))
    return TreeFlipResult(cfg, edge, check)


def _bfs_order(tree: Graph, root: int = 0) -> list[int]:
    order = [root]
    seen = {root}
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for w in tree.neighbors[u]:
            if w not in seen:
                seen.add(w)
                order.append(w)
    return order


@dataclass(frozen=True)
class TreeSample:
    config: np.ndarray
    free_edges: tuple[int, ...]
    unsatisfied: tuple[int, ...]
    check: LocalCheck


def free_light_edges(tree: Graph, coupling: Coupling, eps: float, K: int) -> list[int]:
    """Light edges (|J| < eps) such that every connected non-leaf set of size <= K
    having the edge on its boundary has a strict heavy majority on its boundary,
    both in edge count and in summed |J|."""
    leaves = set(_leaves(tree))
    a = np.abs(coupling.values)
    light = [k for k in range(tree.m) if a[k] < eps]
    allowed = [v not in leaves for v in range(tree.n)]
    out = []
    for k in light:
        u, v = tree.edges[k]
        good = True
        for side, other in ((u, v), (v, u)):
            if not allowed[side]:
                continue
            allow = list(allowed)
            allow[other] = False
            for sub, _ in _subsets_containing(tree, K, side, allow):
                if not _heavy_majority(tree, a, eps, set(sub)):
                    good = False
                    break
            if not good:
                break
        if good:
            out.append(k)
    return out


def _subsets_containing(g: Graph, K: int, root: int, allowed: Sequence[bool]):
    """Connected allowed sets of size <= K containing ``root``."""
    nb = g.neighbors

    def extend(sub, subset, near, ext):
        yield tuple(sub), 0.0
        if len(sub) == K:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            new_ext = list(ext)
            for x in nb[w]:
                if allowed[x] and x not in subset and x not in near:
                    new_ext.append(x)
            added = [x for x in nb[w] if x not in near]
            near.update(added)
            subset.add(w)
            sub.append(w)
            yield from extend(sub, subset, near, new_ext)
            sub.pop()
            subset.discard(w)
            near.difference_update(added)

    near = set(nb[root]) | {root}
    yield from extend([root], {root}, near, [x for x in nb[root] if allowed[x]])


def _heavy_majority(g: Graph, a: np.ndarray, eps: float, sub: set[int]) -> bool:
    hc = lc = 0
    hs = ls = 0.0
    for v in sub:
        for w in g.neighbors[v]:
            if w in sub:
                continue
            x = a[g.edge_id(v, w)]
            if x >= eps:
                hc += 1
                hs += x
            else:
                lc += 1
                ls += x
    return hc > lc and hs > ls


def sample_tree_invariant_gsp(tree: Graph, coupling: Coupling, eps: float, seed: int, K: int) -> TreeSample:
    """Fair coin per free light edge decides whether it is left unsatisfied."""
    _require_tree(tree)
    if np.any(coupling.values <= 0):
        raise ValueError("positive couplings required")
    free = free_light_edges(tree, coupling, eps, K)
    unsat = [k for k in free if derive(seed, "coins", k) >> 63]
    cfg = satisfied_tree_config(tree, coupling, unsat)
    check = verify_local_ground_state(cfg, coupling, tree, K, pinned=_leaves(tree))
    return TreeSample(cfg, tuple(free), tuple(unsat), check)


def check_torus_unique_gsp(window: PlanarWindow, coupling: Coupling) -> GroundStateReport:
    if window.boundary != "periodic":
        raise ValueError("periodic window required")
    if window.n > 25:
        raise BudgetExceeded("torus larger than 25 vertices")
    rep = enumerate_ground_states(window.graph, coupling)
    mono = len(rep.minimizers) == 1 and bool(np.all(rep.minimizers[0] == 1))
    rep.flags["monochromatic_pair_only"] = mono
    rep.notion = "global-minimum (torus)"
    return rep
