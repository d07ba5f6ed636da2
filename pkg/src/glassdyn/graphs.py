"""Finite graph windows: lattice windows with their dual, trees, cylinders, products."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np


class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edges are stored once as ``(u, v)`` with ``u < v`` in lexicographic order;
    that order is the canonical edge order used by couplings and file formats.
    ``labels`` maps a label name to a per-vertex sequence.
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int]],
        labels: dict[str, Sequence[Any]] | None = None,
        kind: str = "graph",
        meta: dict[str, Any] | None = None,
    ):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            canon.add((u, v) if u < v else (v, u))
        self.n = n
        self.edges: list[tuple[int, int]] = sorted(canon)
        self.edge_index: dict[tuple[int, int], int] = {e: i for i, e in enumerate(self.edges)}
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.neighbors: list[tuple[int, ...]] = [tuple(sorted(a)) for a in nbrs]
        self.labels: dict[str, Sequence[Any]] = dict(labels or {})
        for name, vals in self.labels.items():
            if len(vals) != n:
                raise ValueError(f"label {name!r} has wrong length")
        self.kind = kind
        self.meta: dict[str, Any] = dict(meta or {})

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    @cached_property
    def max_degree(self) -> int:
        return max((len(a) for a in self.neighbors), default=0)

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_index[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edge_index

    @cached_property
    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, neighbor, edge id) arrays."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for v in range(self.n):
            indptr[v + 1] = indptr[v] + len(self.neighbors[v])
        nb = np.empty(indptr[-1], dtype=np.int64)
        eid = np.empty(indptr[-1], dtype=np.int64)
        for v in range(self.n):
            s = indptr[v]
            for k, w in enumerate(self.neighbors[v]):
                nb[s + k] = w
                eid[s + k] = self.edge_id(v, w)
        return indptr, nb, eid

    def incident_edges(self, v: int) -> list[int]:
        return [self.edge_id(v, w) for w in self.neighbors[v]]

    def label(self, name: str, v: int, default: Any = None) -> Any:
        vals = self.labels.get(name)
        return default if vals is None else vals[v]

    def is_connected(self, subset: Iterable[int] | None = None) -> bool:
        verts = set(range(self.n)) if subset is None else set(subset)
        if not verts:
            return True
        start = next(iter(verts))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self.neighbors[u]:
                if w in verts and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(verts)

    def components(self, subset: Iterable[int] | None = None) -> list[list[int]]:
        verts = set(range(self.n)) if subset is None else set(subset)
        comps = []
        seen: set[int] = set()
        for s in sorted(verts):
            if s in seen:
                continue
            seen.add(s)
            comp = [s]
            stack = [s]
            while stack:
                u = stack.pop()
                for w in self.neighbors[u]:
                    if w in verts and w not in seen:
                        seen.add(w)
                        comp.append(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def check(self, degree_bound: int | None = None) -> None:
        for v in range(self.n):
            for w in self.neighbors[v]:
                if w == v or v not in self.neighbors[w]:
                    raise AssertionError(f"adjacency broken at {v}-{w}")
        if degree_bound is not None and self.max_degree > degree_bound:
            raise AssertionError("degree bound exceeded")
        levels = self.labels.get("level")
        if levels is not None:
            for u, v in self.edges:
                if abs(levels[u] - levels[v]) > 1:
                    raise AssertionError(f"edge {u}-{v} skips a level")

    def __repr__(self) -> str:
        return f"Graph(kind={self.kind!r}, n={self.n}, m={self.m})"


def induced_subgraph(g: Graph, subset: Iterable[int]) -> tuple[Graph, list[int]]:
    """Subgraph on ``subset``; returns it with the new-to-old vertex map."""
    verts = sorted(set(subset))
    pos = {v: i for i, v in enumerate(verts)}
    edges = [(pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos]
    labels = {k: [vals[v] for v in verts] for k, vals in g.labels.items()}
    return Graph(len(verts), edges, labels, kind=g.kind, meta=dict(g.meta)), verts


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)], kind="path", meta={"size": n})


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)], kind="cycle", meta={"size": n})


def complete_graph(n: int) -> Graph:
    if n < 1:
        raise ValueError("complete graph needs at least 1 vertex")
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)], kind="complete", meta={"size": n})


def product_graph(a: Graph, b: Graph) -> Graph:
    """Cartesian product; vertex (i, j) gets id ``j * a.n + i``."""
    n = a.n * b.n
    edges = []
    for j in range(b.n):
        for u, v in a.edges:
            edges.append((j * a.n + u, j * a.n + v))
    for u, v in b.edges:
        for i in range(a.n):
            edges.append((u * a.n + i, v * a.n + i))
    labels = {
        "slice_index": [i for _ in range(b.n) for i in range(a.n)],
        "factor_index": [j for j in range(b.n) for _ in range(a.n)],
    }
    return Graph(n, edges, labels, kind="product", meta={"left": a.kind, "right": b.kind})


def build_cylinder(slice_graph: Graph, low: int, high: int) -> Graph:
    """Slice times the path ``low..high``; vertex (s, level) gets id ``(level-low) * |slice| + s``."""
    if slice_graph.n == 0:
        raise ValueError("slice must be nonempty")
    if low > high:
        raise ValueError("low level must not exceed high level")
    k = slice_graph.n
    nlev = high - low + 1
    edges = []
    for t in range(nlev):
        for u, v in slice_graph.edges:
            edges.append((t * k + u, t * k + v))
        if t + 1 < nlev:
            for s in range(k):
                edges.append((t * k + s, (t + 1) * k + s))
    labels: dict[str, Sequence[Any]] = {
        "level": [low + t for t in range(nlev) for _ in range(k)],
        "slice_index": [s for _ in range(nlev) for s in range(k)],
    }
    for name, vals in slice_graph.labels.items():
        labels[name] = [vals[s] for _ in range(nlev) for s in range(k)]
    return Graph(
        k * nlev,
        edges,
        labels,
        kind="cylinder",
        meta={"slice": slice_graph.kind, "slice_size": k, "low": low, "high": high},
    )


def build_shared_clique_pair(n: int) -> Graph:
    """Two copies of K_n glued at vertex 0.

    Copy A is ``0..n-1``, copy B is ``0, n..2n-2``.  Label ``copy`` is
    0 for the shared vertex, 1 for copy A and 2 for copy B.
    """
    if n < 4:
        raise ValueError("shared clique pair needs n >= 4")
    a = list(range(n))
    b = [0] + list(range(n, 2 * n - 1))
    edges = [(a[i], a[j]) for i in range(n) for j in range(i + 1, n)]
    edges += [(b[i], b[j]) for i in range(n) for j in range(i + 1, n)]
    copy = [0] + [1] * (n - 1) + [2] * (n - 1)
    shared = [True] + [False] * (2 * n - 2)
    return Graph(2 * n - 1, edges, {"copy": copy, "shared": shared}, kind="shared-clique-pair", meta={"size": n})


def build_regular_tree(degree: int, depth: int) -> Graph:
    """Ball of radius ``depth`` around the root (vertex 0) of the degree-regular tree.

    Vertices are numbered breadth first.  Labels: ``depth``, ``parent``
    (-1 at the root), ``boundary`` (leaves).
    """
    if degree < 3:
        raise ValueError("tree degree must be >= 3")
    if depth < 1:
        raise ValueError("tree depth must be >= 1")
    parent = [-1]
    dep = [0]
    frontier = [0]
    for d in range(1, depth + 1):
        nxt = []
        for u in frontier:
            kids = degree if u == 0 else degree - 1
            for _ in range(kids):
                parent.append(u)
                dep.append(d)
                nxt.append(len(parent) - 1)
        frontier = nxt
    n = len(parent)
    edges = [(parent[v], v) for v in range(1, n)]
    return Graph(
        n,
        edges,
        {"depth": dep, "parent": parent, "boundary": [d == depth for d in dep]},
        kind="tree",
        meta={"degree": degree, "depth": depth},
    )


def tree_subtree_of(g: Graph, v: int) -> int:
    """Index of the root child whose subtree contains ``v`` (-1 for the root)."""
    parent = g.labels["parent"]
    if v == 0:
        return -1
    while parent[v] != 0:
        v = parent[v]
    return g.neighbors[0].index(v)


BOUNDARY_MODES = ("free", "fixed", "periodic")


@dataclass(frozen=True)
class PlanarWindow:
    """Square-lattice window with its dual.

    Vertex (x, y) has id ``y * width + x``.  For free and fixed windows face
    (i, j) is the unit square with lower-left corner (i, j), id
    ``j * (width - 1) + i``, and an extra outer face with id ``n_faces``.
    Periodic windows have ``width * height`` faces and no outer face.
    ``dual_edges[e]`` is the pair of faces separated by primal edge ``e``.
    """

    width: int
    height: int
    boundary: str
    graph: Graph
    n_faces: int
    dual_edges: tuple[tuple[int, int], ...]
    xi: tuple[int, ...] | None = None
    _face_edges: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def outer_face(self) -> int | None:
        return None if self.boundary == "periodic" else self.n_faces

    def vid(self, x: int, y: int) -> int:
        if self.boundary == "periodic":
            x %= self.width
            y %= self.height
        return y * self.width + x

    def coord(self, v: int) -> tuple[int, int]:
        return v % self.width, v // self.width

    def fid(self, i: int, j: int) -> int:
        if self.boundary == "periodic":
            return (j % self.height) * self.width + (i % self.width)
        if 0 <= i < self.width - 1 and 0 <= j < self.height - 1:
            return j * (self.width - 1) + i
        return self.n_faces

    def face_coord(self, f: int) -> tuple[int, int]:
        w = self.width if self.boundary == "periodic" else self.width - 1
        return f % w, f // w

    def face_edges(self, f: int) -> tuple[int, ...]:
        """Primal edges around face ``f`` (bottom, right, top, left)."""
        return self._face_edges[f]

    def face_vertices(self, f: int) -> tuple[int, int, int, int]:
        """Corners of face ``f`` counterclockwise from lower-left."""
        i, j = self.face_coord(f)
        return self.vid(i, j), self.vid(i + 1, j), self.vid(i + 1, j + 1), self.vid(i, j + 1)

    def is_boundary_vertex(self, v: int) -> bool:
        if self.boundary == "periodic":
            return False
        x, y = self.coord(v)
        return x in (0, self.width - 1) or y in (0, self.height - 1)

    @cached_property
    def boundary_vertices(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if self.is_boundary_vertex(v))

    @cached_property
    def interior_vertices(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if not self.is_boundary_vertex(v))

    def pinned(self) -> dict[int, int]:
        """Pinned boundary values for fixed mode, empty otherwise."""
        if self.boundary != "fixed":
            return {}
        vals = self.xi or tuple([1] * self.n)
        return {v: vals[v] for v in self.boundary_vertices}

    def dual_edge_of(self, u: int, v: int) -> tuple[int, int]:
        return self.dual_edges[self.graph.edge_id(u, v)]


def build_square_window(
    width: int, height: int, boundary: str = "free", xi: Sequence[int] | None = None
) -> PlanarWindow:
    """Lattice window of ``width * height`` vertices.

    ``fixed`` windows pin the boundary ring to ``xi`` (default all +1);
    ``periodic`` windows are tori and need both dimensions at least 3 so the
    graph stays simple.
    """
    if width < 2 or height < 2:
        raise ValueError("window dimensions must be >= 2")
    if boundary not in BOUNDARY_MODES:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    periodic = boundary == "periodic"
    if periodic and (width < 3 or height < 3):
        raise ValueError("periodic windows need dimensions >= 3")

    def vid(x: int, y: int) -> int:
        return (y % height) * width + (x % width)

    edges = []
    for y in range(height):
        for x in range(width):
            if x + 1 < width or periodic:
                edges.append((vid(x, y), vid(x + 1, y)))
            if y + 1 < height or periodic:
                edges.append((vid(x, y), vid(x, y + 1)))
    coords = [(v % width, v // width) for v in range(width * height)]
    bnd = [
        (not periodic) and (x in (0, width - 1) or y in (0, height - 1)) for x, y in coords
    ]
    g = Graph(
        width * height,
        edges,
        {"coord": coords, "boundary": bnd},
        kind="square-window",
        meta={"width": width, "height": height, "boundary": boundary},
    )
    fw = width if periodic else width - 1
    fh = height if periodic else height - 1
    n_faces = fw * fh

    def fid(i: int, j: int) -> int:
        if periodic:
            return (j % height) * width + (i % width)
        if 0 <= i < fw and 0 <= j < fh:
            return j * fw + i
        return n_faces

    dual = [None] * g.m
    for e, (u, v) in enumerate(g.edges):
        (x0, y0), (x1, y1) = coords[u], coords[v]
        if y0 == y1:
            # horizontal edge; left endpoint is the one whose successor is the other
            x = x0 if vid(x0 + 1, y0) == v else x1
            a, b = fid(x, y0 - 1), fid(x, y0)
        else:
            y = y0 if vid(x0, y0 + 1) == v else y1
            a, b = fid(x0 - 1, y), fid(x0, y)
        dual[e] = (a, b) if a <= b else (b, a)
    face_edges = []
    for f in range(n_faces):
        i, j = f % fw, f // fw
        p00, p10, p11, p01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
        face_edges.append(
            (g.edge_id(p00, p10), g.edge_id(p10, p11), g.edge_id(p01, p11), g.edge_id(p00, p01))
        )
    if boundary == "fixed":
        xi_t = tuple(int(s) for s in xi) if xi is not None else tuple([1] * g.n)
        if len(xi_t) != g.n or any(s not in (-1, 1) for s in xi_t):
            raise ValueError("xi must give a +-1 value per vertex")
    else:
        xi_t = None
    return PlanarWindow(width, height, boundary, g, n_faces, tuple(dual), xi_t, tuple(face_edges))


def from_recipe(recipe: str) -> Graph | PlanarWindow:
    """Build a graph from a short recipe string.

    ``window:WxH[:mode]``, ``tree:DEGREE:DEPTH``, ``path:N``, ``cycle:N``,
    ``complete:N``, ``clique-pair:N`` and ``cylinder:SLICE:LOW:HIGH`` where
    SLICE is ``K<n>``, ``C<n>`` or ``pair<n>``.
    """
    kind, *args = recipe.split(":")
    try:
        if kind == "window":
            w, h = (int(x) for x in args[0].lower().split("x"))
            return build_square_window(w, h, args[1] if len(args) > 1 else "free")
        if kind == "tree":
            return build_regular_tree(int(args[0]), int(args[1]))
        if kind == "path":
            return path_graph(int(args[0]))
        if kind == "cycle":
            return cycle_graph(int(args[0]))
        if kind == "complete":
            return complete_graph(int(args[0]))
        if kind == "clique-pair":
            return build_shared_clique_pair(int(args[0]))
        if kind == "cylinder":
            sl = args[0]
            if sl.startswith("pair"):
                base = build_shared_clique_pair(int(sl[4:]))
            elif sl[0] == "K":
                base = complete_graph(int(sl[1:]))
            elif sl[0] == "C":
                base = cycle_graph(int(sl[1:]))
            else:
                raise ValueError(sl)
            return build_cylinder(base, int(args[1]), int(args[2]))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad graph recipe {recipe!r}") from exc
    raise ValueError(f"unknown graph recipe {recipe!r}")
