"""Couplings, fixed edges and fixed trees, choking cycles, percolation helpers."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .graphs import Graph, PlanarWindow
from .loops import polygon_shapes
from .rng import generator

POSITIVE_LAWS = ("exponential", "uniform", "halfnormal")


@dataclass(frozen=True)
class Descriptor:
    """Coupling law: ``gaussian`` (sd), ``uniform`` (half-width), ``constant``
    (value) or ``positive`` (a law from POSITIVE_LAWS with a scale)."""

    kind: str
    scale: float = 1.0
    law: str = ""

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform", "constant", "positive"):
            raise ValueError(f"unknown coupling law {self.kind!r}")
        if self.kind == "positive" and self.law not in POSITIVE_LAWS:
            raise ValueError(f"unknown positive law {self.law!r}")
        if self.kind != "constant" and not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def continuous(self) -> bool:
        return self.kind != "constant"

    def __str__(self) -> str:
        if self.kind == "positive":
            return f"positive:{self.law}:{self.scale!r}"
        return f"{self.kind}:{self.scale!r}"

    @classmethod
    def parse(cls, text: str) -> "Descriptor":
        parts = text.strip().split(":")
        kind = parts[0]
        if kind == "positive":
            law = parts[1] if len(parts) > 1 else "exponential"
            scale = float(parts[2]) if len(parts) > 2 else 1.0
            return cls(kind, scale, law)
        if kind == "constant" and len(parts) == 1:
            return cls(kind, 1.0)
        return cls(kind, float(parts[1]) if len(parts) > 1 else 1.0)


GAUSSIAN = Descriptor("gaussian", 1.0)
CONSTANT = Descriptor("constant", 1.0)


@dataclass(frozen=True)
class Coupling:
    graph: Graph
    values: np.ndarray  # aligned with graph.edges
    descriptor: Descriptor
    seed: int = 0

    def __post_init__(self):
        if len(self.values) != self.graph.m:
            raise ValueError("one coupling value per edge required")

    def J(self, u: int, v: int) -> float:
        return float(self.values[self.graph.edge_id(u, v)])

    @property
    def integral(self) -> bool:
        return not self.descriptor.continuous

    def with_value(self, edge: int, value: float) -> "Coupling":
        vals = self.values.copy()
        vals[edge] = value
        return Coupling(self.graph, vals, self.descriptor, self.seed)


def _draw(desc: Descriptor, rng: np.random.Generator, m: int) -> np.ndarray:
    if desc.kind == "gaussian":
        return rng.normal(0.0, desc.scale, m)
    if desc.kind == "uniform":
        return rng.uniform(-desc.scale, desc.scale, m)
    if desc.law == "exponential":
        return rng.exponential(desc.scale, m)
    if desc.law == "uniform":
        return rng.uniform(0.0, desc.scale, m)
    return np.abs(rng.normal(0.0, desc.scale, m))


def sample_couplings(graph: Graph, descriptor: Descriptor | str, seed: int) -> Coupling:
    desc = Descriptor.parse(descriptor) if isinstance(descriptor, str) else descriptor
    if desc.kind == "constant":
        return Coupling(graph, np.full(graph.m, float(desc.scale)), desc, seed)
    attempt = 0
    while True:
        vals = _draw(desc, generator(seed, "couplings", attempt), graph.m)
        # continuous laws: zero or repeated values are null events, resample if hit
        if np.all(vals != 0) and len(np.unique(vals)) == graph.m:
            return Coupling(graph, vals, desc, seed)
        attempt += 1


def constant_coupling(graph: Graph, value: float = 1.0) -> Coupling:
    return Coupling(graph, np.full(graph.m, float(value)), Descriptor("constant", value), 0)


def custom_coupling(graph: Graph, values: Sequence[float]) -> Coupling:
    vals = np.asarray(values, dtype=float)
    ints = np.all(vals == np.round(vals))
    desc = Descriptor("constant", 1.0) if ints else Descriptor("gaussian", 1.0)
    return Coupling(graph, vals, desc, 0)


def _edge_index(graph: Graph, edge: int | tuple[int, int]) -> int:
    return edge if isinstance(edge, (int, np.integer)) else graph.edge_id(*edge)


def is_fixed_edge(coupling: Coupling, edge: int | tuple[int, int]) -> bool:
    """|J_xy| strictly exceeds the summed |J| of the other edges at x or at y."""
    g = coupling.graph
    e = _edge_index(g, edge)
    x, y = g.edges[e]
    a = np.abs(coupling.values)
    w = a[e]
    for end in (x, y):
        rest = sum(a[f] for f in g.incident_edges(end) if f != e)
        if w > rest:
            return True
    return False


def fixed_edges(coupling: Coupling) -> list[int]:
    return [e for e in range(coupling.graph.m) if is_fixed_edge(coupling, e)]


@dataclass(frozen=True)
class FixedTree:
    edges: tuple[int, ...]
    root: int
    exhaustive: bool  # False means found by the greedy search only


def tree_dominates(coupling: Coupling, subset: Iterable[int], tree_edges: Sequence[int], root: int) -> bool:
    """Ordered domination test for a spanning tree of ``subset`` rooted at ``root``.

    Every non-root vertex's edge toward the root must outweigh the summed
    |J| of all non-tree edges touching the subset plus its other tree edges.
    """
    g = coupling.graph
    a = np.abs(coupling.values)
    verts = set(subset)
    tset = set(tree_edges)
    outside = 0.0
    for v in verts:
        for f in g.incident_edges(v):
            if f not in tset:
                u, w = g.edges[f]
                # count each edge once
                other = w if u == v else u
                if other in verts and other < v:
                    continue
                outside += a[f]
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for f in tree_edges:
        u, w = g.edges[f]
        adj[u].append(f)
        adj[w].append(f)
    parent_edge = {root: -1}
    stack = [root]
    while stack:
        u = stack.pop()
        for f in adj[u]:
            x, y = g.edges[f]
            w = y if x == u else x
            if w not in parent_edge:
                parent_edge[w] = f
                stack.append(w)
    if len(parent_edge) != len(verts):
        return False
    for v in verts:
        e = parent_edge[v]
        if e < 0:
            continue
        others = sum(a[f] for f in adj[v] if f != e)
        if not a[e] > outside + others:
            return False
    return True


def _spanning_trees(g: Graph, verts: list[int]) -> Iterable[tuple[int, ...]]:
    inner = [e for e, (u, v) in enumerate(g.edges) if u in verts and v in verts]
    k = len(verts) - 1
    vs = set(verts)
    for combo in itertools.combinations(inner, k):
        parent = {v: v for v in vs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for e in combo:
            ru, rv = find(g.edges[e][0]), find(g.edges[e][1])
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if ok:
            yield combo


def _max_spanning_tree(coupling: Coupling, verts: list[int]) -> tuple[int, ...]:
    g = coupling.graph
    vs = set(verts)
    inner = [e for e, (u, v) in enumerate(g.edges) if u in vs and v in vs]
    inner.sort(key=lambda e: -abs(coupling.values[e]))
    parent = {v: v for v in vs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = []
    for e in inner:
        ru, rv = find(g.edges[e][0]), find(g.edges[e][1])
        if ru != rv:
            parent[ru] = rv
            out.append(e)
    return tuple(out)


def find_fixed_spanning_tree(coupling: Coupling, subset: Iterable[int], exhaustive_cap: int = 8) -> FixedTree | None:
    verts = sorted(set(subset))
    g = coupling.graph
    if not verts:
        raise ValueError("empty subset")
    if not g.is_connected(verts):
        raise ValueError("subset does not induce a connected subgraph")
    if len(verts) == 1:
        return FixedTree((), verts[0], True)
    if len(verts) <= exhaustive_cap:
        for tree in _spanning_trees(g, verts):
            for root in verts:
                if tree_dominates(coupling, verts, tree, root):
                    return FixedTree(tree, root, True)
        return None
    tree = _max_spanning_tree(coupling, verts)
    for root in verts:
        if tree_dominates(coupling, verts, tree, root):
            return FixedTree(tree, root, False)
    return None


def _surrounds(cycle: Sequence[tuple[int, int]], p: tuple[int, int]) -> bool:
    px, py = p
    if p in cycle:
        return False
    odd = False
    n = len(cycle)
    for k in range(n):
        (x0, y0), (x1, y1) = cycle[k], cycle[(k + 1) % n]
        if x0 == x1 and x0 > px and min(y0, y1) == py:
            odd = not odd
    return odd


@dataclass(frozen=True)
class ChokingCycle:
    vertices: tuple[int, ...]
    touching_edges: int
    enclosed: int


def touching_edge_count(g: Graph, cycle_vertices: Iterable[int]) -> int:
    """Edges with at least one endpoint on the cycle."""
    on = set(cycle_vertices)
    return sum(1 for u, v in g.edges if u in on or v in on)


def find_choking_cycle(window: PlanarWindow, vertex: int, N: int, max_length: int = 16) -> ChokingCycle | None:
    """Smallest-enclosing simple cycle around ``vertex`` touched by fewer than N edges."""
    if N <= 1 or window.boundary == "periodic":
        return None
    px, py = window.coord(vertex)
    W, H = window.width, window.height
    candidates = []
    for shape in polygon_shapes(max_length):
        xs = [p[0] for p in shape]
        ys = [p[1] for p in shape]
        for dx in range(-min(xs), W - max(xs)):
            for dy in range(-min(ys), H - max(ys)):
                pts = [(x + dx, y + dy) for x, y in shape]
                if not _surrounds(pts, (px, py)):
                    continue
                vs = [window.vid(x, y) for x, y in pts]
                count = touching_edge_count(window.graph, vs)
                if count < N:
                    area = sum(
                        _surrounds(pts, (x, y))
                        for x in range(min(xs) + dx, max(xs) + dx + 1)
                        for y in range(min(ys) + dy, max(ys) + dy + 1)
                    )
                    candidates.append((area, len(pts), tuple(vs), count))
    if not candidates:
        return None
    area, _, vs, count = min(candidates)
    return ChokingCycle(vs, count, area)


@dataclass(frozen=True)
class PercColoring:
    black: np.ndarray  # bool per vertex
    p: float
    seed: int = 0


def sample_coloring(graph: Graph, p: float, seed: int) -> PercColoring:
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return PercColoring(generator(seed, "percolation").random(graph.n) < p, p, seed)


def majority_recolor(graph: Graph, coloring: PercColoring | np.ndarray) -> np.ndarray:
    """Red mask: strict black majority among a vertex and its neighbors."""
    black = np.asarray(coloring.black if isinstance(coloring, PercColoring) else coloring, dtype=bool)
    indptr, nb, _ = graph.csr
    deg = np.diff(indptr)
    counts = np.add.reduceat(black[nb].astype(np.int64), indptr[:-1]) if len(nb) else np.zeros(graph.n, int)
    counts = np.where(deg > 0, counts, 0) + black
    return 2 * counts > deg + 1


def cluster_sizes(graph: Graph, member: np.ndarray | Callable[[int], bool]) -> list[int]:
    """Sizes of components of the subgraph induced by ``member``, largest first."""
    if callable(member):
        mask = np.array([bool(member(v)) for v in range(graph.n)], dtype=bool)
    else:
        mask = np.asarray(member, dtype=bool)
    if not mask.any():
        return []
    e = graph.edge_array
    keep = mask[e[:, 0]] & mask[e[:, 1]] if len(e) else np.zeros(0, bool)
    sub = e[keep]
    adj = coo_matrix((np.ones(len(sub)), (sub[:, 0], sub[:, 1])), shape=(graph.n, graph.n))
    _, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels[mask])
    return sorted((int(s) for s in sizes if s > 0), reverse=True)


def fixing_probability(coupling_sampler: Callable[[int], Coupling], subset: Sequence[int], draws: int) -> float:
    hits = sum(find_fixed_spanning_tree(coupling_sampler(s), subset) is not None for s in range(draws))
    return hits / draws


def frustration_sign(coupling: Coupling, edges: Iterable[int]) -> int:
    return int(math.copysign(1, np.prod(np.sign(coupling.values[list(edges)]))))
