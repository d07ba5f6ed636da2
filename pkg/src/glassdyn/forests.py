"""Spanning forests on a lattice window: stems, roots, classification, mass transport."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import networkx as nx
import numpy as np

from .rng import generator


@dataclass
class ForestView:
    """Parent map on a ``width * height`` window; vertex (x, y) has id ``y * width + x``.

    ``parent[v] == -1`` means the parent is unknown or outside the window.
    """

    width: int
    height: int
    parent: np.ndarray

    def __post_init__(self):
        self.parent = np.asarray(self.parent, dtype=np.int64)
        if len(self.parent) != self.width * self.height:
            raise ValueError("parent map has the wrong length")

    @property
    def n(self) -> int:
        return self.width * self.height

    def vid(self, x: int, y: int) -> int:
        return y * self.width + x

    def coord(self, v: int) -> tuple[int, int]:
        return v % self.width, v // self.width

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parent):
            if p >= 0:
                out[p].append(v)
        return out

    def stem(self, v: int) -> list[int]:
        """v and its ancestors inside the window."""
        out = [v]
        seen = {v}
        while self.parent[out[-1]] >= 0:
            u = int(self.parent[out[-1]])
            if u in seen:
                raise ValueError("parent map has a cycle")
            seen.add(u)
            out.append(u)
        return out

    def roots(self, v: int) -> set[int]:
        """R(v): v and all its descendants inside the window."""
        ch = self.children()
        out = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for w in ch[u]:
                out.add(w)
                stack.append(w)
        return out

    def is_acyclic(self) -> bool:
        state = np.zeros(self.n, dtype=np.int8)  # 0 new, 1 on stack, 2 done
        for s in range(self.n):
            if state[s]:
                continue
            path = []
            v = s
            while v >= 0 and state[v] == 0:
                state[v] = 1
                path.append(v)
                v = int(self.parent[v])
            if v >= 0 and state[v] == 1:
                return False
            for u in path:
                state[u] = 2
        return True

    def edges(self) -> list[tuple[int, int]]:
        return [(v, int(p)) for v, p in enumerate(self.parent) if p >= 0]

    def components(self) -> list[list[int]]:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return [sorted(c) for c in nx.connected_components(g)]

    def on_window_boundary(self, v: int) -> bool:
        x, y = self.coord(v)
        return x in (0, self.width - 1) or y in (0, self.height - 1)


def column_forest(width: int, height: int) -> ForestView:
    """Every vertex's parent is the vertex above it."""
    v = np.arange(width * height)
    parent = np.where(v + width < width * height, v + width, -1)
    return ForestView(width, height, parent)


def sample_directed_forest(width: int, height: int, p: float, seed: int) -> ForestView:
    """Parent up with probability p, otherwise right; -1 past the window edge."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    n = width * height
    v = np.arange(n)
    x, y = v % width, v // width
    up = generator(seed, "forest").random(n) < p
    parent = np.where(up, np.where(y + 1 < height, v + width, -1), np.where(x + 1 < width, v + 1, -1))
    return ForestView(width, height, parent)


def mass_function(rule: str | Callable[[int], float]) -> Callable[[int], float]:
    """``eq:n`` (1 at k = n), ``le:n`` (1 for k <= n), ``one`` or a callable."""
    if callable(rule):
        return rule
    if rule == "one":
        return lambda k: 1.0
    kind, _, val = rule.partition(":")
    n = int(val)
    if kind == "eq":
        return lambda k: 1.0 if k == n else 0.0
    if kind == "le":
        return lambda k: 1.0 if k <= n else 0.0
    raise ValueError(f"unknown mass function {rule!r}")


def descendant_counts(forest: ForestView, depth: int) -> np.ndarray:
    """counts[k - 1, v] = number of descendants of v at tree distance k, k = 1..depth."""
    par = forest.parent
    ok = par >= 0
    out = np.zeros((depth, forest.n))
    cur = np.ones(forest.n)
    for k in range(depth):
        cur = np.bincount(par[ok], weights=cur[ok], minlength=forest.n)
        out[k] = cur
    return out


@dataclass(frozen=True)
class MTEstimate:
    lhs: float
    rhs: float
    core_size: int


def mt_estimate(forest: ForestView, f: str | Callable[[int], float], margin: int) -> MTEstimate:
    """Mass sent along the stem versus mass received from the roots.

    lhs is sum_{k=1..margin} f(k); rhs averages, over the margin-shrunk core,
    sum over descendants y within tree distance margin of f(distance).
    """
    fn = mass_function(f)
    if margin < 1 or 2 * margin >= min(forest.width, forest.height):
        raise ValueError("margin must be positive and leave a nonempty core")
    counts = descendant_counts(forest, margin)
    weights = np.array([fn(k) for k in range(1, margin + 1)])
    recv = weights @ counts
    v = np.arange(forest.n)
    x, y = v % forest.width, v // forest.width
    core = (x >= margin) & (x < forest.width - margin) & (y >= margin) & (y < forest.height - margin)
    if not core.any():
        raise ValueError("empty core")
    return MTEstimate(float(weights.sum()), float(recv[core].mean()), int(core.sum()))


def count_boundary_path_edges(forest: ForestView, n: int, center: tuple[int, int] | None = None) -> int:
    """e_n: in-box forest edges (v, parent v) whose in-box subtree of v meets
    the box boundary.  The box is the l-infinity ball of radius n around center."""
    W, H = forest.width, forest.height
    cx, cy = center if center is not None else (W // 2, H // 2)
    if cx - n < 0 or cy - n < 0 or cx + n >= W or cy + n >= H:
        raise ValueError("box does not fit in the window")
    par = forest.parent

    def inbox(v: int) -> bool:
        x, y = v % W, v // W
        return abs(x - cx) <= n and abs(y - cy) <= n

    reach = np.zeros(forest.n, dtype=bool)
    boundary = []
    for x in range(cx - n, cx + n + 1):
        boundary += [forest.vid(x, cy - n), forest.vid(x, cy + n)]
    for y in range(cy - n + 1, cy + n):
        boundary += [forest.vid(cx - n, y), forest.vid(cx + n, y)]
    for b in boundary:
        v = b
        while not reach[v]:
            reach[v] = True
            p = int(par[v])
            if p < 0 or not inbox(p):
                break
            v = p
    count = 0
    for v in np.flatnonzero(reach):
        p = int(par[v])
        if p >= 0 and inbox(p):
            count += 1
    return count


@dataclass(frozen=True)
class ComponentClass:
    label: str  # finite, single, bi, multi, undetermined
    disjoint_paths: int
    encounter_points: tuple[int, ...]


def _disjoint_boundary_paths(forest: ForestView, comp: list[int]) -> int:
    inner = [v for v in comp if not forest.on_window_boundary(v)]
    outer = [v for v in comp if forest.on_window_boundary(v)]
    if not inner or not outer:
        return 0
    g = nx.DiGraph()
    cs = set(comp)
    for v in comp:
        g.add_edge(("in", v), ("out", v), capacity=1)
    for v, p in forest.edges():
        if v in cs:
            g.add_edge(("out", v), ("in", p), capacity=1)
            g.add_edge(("out", p), ("in", v), capacity=1)
    for v in inner:
        g.add_edge("S", ("in", v), capacity=1)
    for v in outer:
        g.add_edge(("out", v), "T", capacity=1)
    return int(nx.maximum_flow_value(g, "S", "T"))


def encounter_points(forest: ForestView, comp: list[int]) -> list[int]:
    """Interior vertices whose removal leaves >= 3 parts reaching the window boundary."""
    cs = set(comp)
    adj: dict[int, list[int]] = {v: [] for v in comp}
    for v, p in forest.edges():
        if v in cs:
            adj[v].append(p)
            adj[p].append(v)
    # a branch from v toward w reaches the boundary iff its subtree holds a boundary vertex
    reach_cache: dict[tuple[int, int], bool] = {}

    def reaches(frm: int, to: int) -> bool:
        key = (frm, to)
        if key in reach_cache:
            return reach_cache[key]
        stack = [(to, frm)]
        hit = False
        while stack:
            u, prev = stack.pop()
            if forest.on_window_boundary(u):
                hit = True
                break
            stack.extend((w, u) for w in adj[u] if w != prev)
        reach_cache[key] = hit
        return hit

    out = []
    for v in comp:
        if forest.on_window_boundary(v) or len(adj[v]) < 3:
            continue
        if sum(reaches(v, w) for w in adj[v]) >= 3:
            out.append(v)
    return out


def classify_component(forest: ForestView, component: Sequence[int]) -> ComponentClass:
    comp = sorted(component)
    cs = set(comp)
    along = any(
        forest.on_window_boundary(v) and forest.on_window_boundary(int(p))
        for v, p in forest.edges()
        if v in cs
    )
    k = _disjoint_boundary_paths(forest, comp)
    enc = tuple(encounter_points(forest, comp))
    if along:
        return ComponentClass("undetermined", k, enc)
    label = {0: "finite", 1: "single", 2: "bi"}.get(k, "multi")
    return ComponentClass(label, k, enc)


def forest_from_edges(width: int, height: int, parent_of: dict[tuple[int, int], tuple[int, int]]) -> ForestView:
    """Build a forest from a coordinate parent map (handy for hand-made instances)."""
    par = np.full(width * height, -1, dtype=np.int64)
    for (x, y), (px, py) in parent_of.items():
        par[y * width + x] = py * width + px
    return ForestView(width, height, par)


def en_trend(ns: Sequence[int], seeds: int, p: float = 0.5, master: int = 0, pad: int = 2) -> list[tuple[int, float, float, int]]:
    """Mean and standard error of e_n / n for the directed-forest sampler."""
    out = []
    for n in ns:
        side = 2 * n + 1 + 2 * pad
        vals = []
        for s in range(seeds):
            f = sample_directed_forest(side, side, p, master * 1_000_003 + s)
            vals.append(count_boundary_path_edges(f, n) / n)
        arr = np.array(vals)
        se = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
        out.append((n, float(arr.mean()), se, seeds))
    return out
