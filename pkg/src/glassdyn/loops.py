"""Simple loops on the dual of a square-lattice window and their congruence types.

A dual loop is a self-avoiding polygon on face centers.  It encloses a set
``A`` of primal vertices; its dual edges are exactly the primal edges joining
``A`` to its complement.  ``V`` is ``A`` together with the outer endpoints of
those edges, and the span ``S = |V|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .graphs import PlanarWindow

Point = tuple[int, int]

# The eight lattice symmetries fixing the origin, as (x, y) -> (a x + b y, c x + d y).
SYMMETRIES: tuple[tuple[int, int, int, int], ...] = (
    (1, 0, 0, 1),
    (0, -1, 1, 0),
    (-1, 0, 0, -1),
    (0, 1, -1, 0),
    (-1, 0, 0, 1),
    (1, 0, 0, -1),
    (0, 1, 1, 0),
    (0, -1, -1, 0),
)

_STEPS = ((1, 0), (0, 1), (-1, 0), (0, -1))


@dataclass(frozen=True)
class DualLoop:
    faces: tuple[int, ...]      # cyclic sequence of face ids
    points: tuple[Point, ...]   # face coordinates in the same order
    edges: tuple[int, ...]      # primal edge ids crossed by the loop
    enclosed: frozenset[int]    # primal vertices inside
    span_set: frozenset[int]    # enclosed vertices plus outer endpoints of crossed edges

    @property
    def length(self) -> int:
        return len(self.faces)

    @property
    def span(self) -> int:
        return len(self.span_set)

    @property
    def area(self) -> int:
        return len(self.enclosed)


@dataclass(frozen=True)
class LoopType:
    canonical: tuple[Point, ...]
    length: int
    span: int
    area: int
    orientations: int  # distinct images under the 8 symmetries, up to translation

    @property
    def n_at_origin(self) -> int:
        """Placements whose span set contains a fixed vertex."""
        return self.orientations * self.span

    @property
    def n_enclosing(self) -> int:
        """Placements enclosing a fixed vertex."""
        return self.orientations * self.area

    @property
    def key(self) -> str:
        return "L{}:".format(self.length) + "".join(f"{x},{y};" for x, y in self.canonical)


def _normalize_cycle(pts: Sequence[Point]) -> tuple[Point, ...]:
    mx = min(p[0] for p in pts)
    my = min(p[1] for p in pts)
    q = [(x - mx, y - my) for x, y in pts]
    n = len(q)
    best = None
    for seq in (q, q[::-1]):
        for s in range(n):
            cand = tuple(seq[s:] + seq[:s])
            if best is None or cand < best:
                best = cand
    return best


def _transform(pts: Iterable[Point], sym: tuple[int, int, int, int]) -> list[Point]:
    a, b, c, d = sym
    return [(a * x + b * y, c * x + d * y) for x, y in pts]


def canonical_form(points: Sequence[Point]) -> tuple[Point, ...]:
    return min(_normalize_cycle(_transform(points, s)) for s in SYMMETRIES)


def canonical_loop_type(loop: DualLoop | Sequence[Point]) -> LoopType:
    pts = loop.points if isinstance(loop, DualLoop) else tuple(loop)
    return _type_of(canonical_form(pts))


@lru_cache(maxsize=None)
def _type_of(canon: tuple[Point, ...]) -> LoopType:
    images = {_normalize_cycle(_transform(canon, s)) for s in SYMMETRIES}
    inside = enclosed_cells(canon)
    span = set(inside)
    for x, y in inside:
        for dx, dy in _STEPS:
            span.add((x + dx, y + dy))
    return LoopType(canon, len(canon), len(span), len(inside), len(images))


def enclosed_cells(points: Sequence[Point]) -> list[Point]:
    """Primal cells inside a face-coordinate polygon.

    Face (i, j) has its center at (i + 1/2, j + 1/2); primal vertex (x, y) is
    inside iff a rightward ray from it crosses an odd number of vertical steps
    (i, j)-(i, j+1) with ``j + 1 == y`` and ``i >= x``.
    """
    crossings: dict[int, list[int]] = {}
    n = len(points)
    for k in range(n):
        (x0, y0), (x1, y1) = points[k], points[(k + 1) % n]
        if x0 == x1:
            crossings.setdefault(max(y0, y1), []).append(x0)
    cells = []
    for y, xs in crossings.items():
        xs.sort()
        for a, b in zip(xs[0::2], xs[1::2]):
            cells.extend((x, y) for x in range(a + 1, b + 1))
    return sorted(cells)


@lru_cache(maxsize=None)
def polygon_shapes(max_length: int) -> tuple[tuple[Point, ...], ...]:
    """All self-avoiding polygons of length <= max_length, anchored at their
    lowest-then-leftmost point (0, 0), one orientation each."""
    if max_length < 4:
        return ()
    out: list[tuple[Point, ...]] = []
    path: list[Point] = [(0, 0)]
    on_path = {(0, 0)}

    def above(p: Point) -> bool:
        return p[1] > 0 or (p[1] == 0 and p[0] > 0)

    def extend() -> None:
        x, y = path[-1]
        k = len(path)
        for dx, dy in _STEPS:
            q = (x + dx, y + dy)
            if q == (0, 0):
                if k >= 4 and path[1] < path[-1]:
                    out.append(tuple(path))
                continue
            if q in on_path or not above(q):
                continue
            # remaining budget must allow returning to the origin
            if k + abs(q[0]) + abs(q[1]) > max_length:
                continue
            path.append(q)
            on_path.add(q)
            extend()
            path.pop()
            on_path.discard(q)

    extend()
    out.sort(key=lambda s: (len(s), s))
    return tuple(out)


def predicted_loop_count(window: PlanarWindow, max_length: int) -> int:
    fw, fh = window.width - 1, window.height - 1
    total = 0
    for shape in polygon_shapes(max_length):
        w = max(p[0] for p in shape) - min(p[0] for p in shape)
        h = max(p[1] for p in shape)
        total += max(0, fw - w) * max(0, fh - h)
    return total


def _make_loop(window: PlanarWindow, pts: Sequence[Point]) -> DualLoop:
    faces = tuple(window.fid(i, j) for i, j in pts)
    edges = []
    n = len(pts)
    for k in range(n):
        (i0, j0), (i1, j1) = pts[k], pts[(k + 1) % n]
        if j0 == j1:
            i = max(i0, i1)
            edges.append(window.graph.edge_id(window.vid(i, j0), window.vid(i, j0 + 1)))
        else:
            j = max(j0, j1)
            edges.append(window.graph.edge_id(window.vid(i0, j), window.vid(i0 + 1, j)))
    inside = frozenset(window.vid(x, y) for x, y in enclosed_cells(pts))
    span = set(inside)
    for e in edges:
        span.update(window.graph.edges[e])
    return DualLoop(faces, tuple(pts), tuple(edges), inside, frozenset(span))


def enumerate_dual_loops(window: PlanarWindow, max_length: int, cap: int = 2_000_000) -> list[DualLoop]:
    """Every simple dual loop of length <= max_length using only inner faces."""
    if max_length < 4:
        raise ValueError("max_length must be >= 4")
    if window.boundary == "periodic":
        raise ValueError("loop enumeration needs a free or fixed window")
    predicted = predicted_loop_count(window, max_length)
    if predicted > cap:
        raise MemoryError(f"{predicted} loops predicted, cap is {cap}")
    fw, fh = window.width - 1, window.height - 1
    loops = []
    for shape in polygon_shapes(max_length):
        xs = [p[0] for p in shape]
        h = max(p[1] for p in shape)
        lo, hi = min(xs), max(xs)
        for j in range(0, fh - h):
            for i in range(-lo, fw - hi):
                loops.append(_make_loop(window, [(x + i, y + j) for x, y in shape]))
    return loops


def loop_from_points(window: PlanarWindow, pts: Sequence[Point]) -> DualLoop:
    """Build a loop from face coordinates, validating simplicity and adjacency."""
    n = len(pts)
    if n < 4 or len(set(pts)) != n:
        raise ValueError("loop must be simple with at least 4 faces")
    fw, fh = window.width - 1, window.height - 1
    for k in range(n):
        (i0, j0), (i1, j1) = pts[k], pts[(k + 1) % n]
        if abs(i0 - i1) + abs(j0 - j1) != 1:
            raise ValueError("consecutive faces must be adjacent")
        if not (0 <= i0 < fw and 0 <= j0 < fh):
            raise ValueError("loop leaves the window")
    return _make_loop(window, pts)


def loop_types(loops: Iterable[DualLoop]) -> dict[tuple[Point, ...], LoopType]:
    out: dict[tuple[Point, ...], LoopType] = {}
    for lp in loops:
        t = canonical_loop_type(lp)
        out.setdefault(t.canonical, t)
    return out


def loops_enclosing(loops: Iterable[DualLoop], v: int) -> list[DualLoop]:
    return [lp for lp in loops if v in lp.enclosed]


def loops_touching(loops: Iterable[DualLoop], v: int) -> list[DualLoop]:
    return [lp for lp in loops if v in lp.span_set]


def type_census(loops: Sequence[DualLoop], v: int) -> dict[tuple[Point, ...], tuple[int, int, bool]]:
    """Per type: (placements touching v in the window, expected count, truncated flag)."""
    types = loop_types(loops)
    seen: dict[tuple[Point, ...], int] = {k: 0 for k in types}
    for lp in loops_touching(loops, v):
        seen[canonical_form(lp.points)] += 1
    return {k: (seen[k], t.n_at_origin, seen[k] != t.n_at_origin) for k, t in types.items()}
