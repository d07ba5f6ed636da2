"""Lattice paths: crosses, snails and ray intersections."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Point = tuple[int, int]

AXES = {"x+": (1, 0), "x-": (-1, 0), "y+": (0, 1), "y-": (0, -1)}


class CrossUnavailable(LookupError):
    """Not enough path points on some axis ray.

    ``truncated`` is True when the path leaves the window, so more
    intersections could exist outside it.
    """

    def __init__(self, direction: str, found: int, needed: int, truncated: bool):
        super().__init__(f"ray {direction}: {found} of {needed} intersections" + (" (window truncated)" if truncated else ""))
        self.direction = direction
        self.found = found
        self.needed = needed
        self.truncated = truncated


class LatticePath:
    """Simple nearest-neighbor path with direction ``t(points[i]) = i + offset``."""

    def __init__(self, points: Sequence[Point], offset: int = 0, window: tuple[int, int, int, int] | None = None):
        pts = [(int(x), int(y)) for x, y in points]
        if not pts:
            raise ValueError("empty path")
        for a, b in zip(pts, pts[1:]):
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ValueError(f"{a} and {b} are not lattice neighbors")
        self.points = pts
        self.index = {p: i for i, p in enumerate(pts)}
        if len(self.index) != len(pts):
            raise ValueError("path is not simple")
        self.offset = offset
        # window as (xmin, ymin, xmax, ymax); used only for truncation reports
        self.window = window

    def __len__(self) -> int:
        return len(self.points)

    def t(self, p: Point) -> int:
        return self.index[p] + self.offset

    def past(self, p: Point) -> list[Point]:
        return self.points[: self.index[p]]

    def future(self, p: Point) -> list[Point]:
        return self.points[self.index[p] + 1:]

    def is_past(self, u: Point, v: Point) -> bool:
        """u lies in the past of v."""
        return self.index[u] < self.index[v]

    @property
    def truncated(self) -> bool:
        if self.window is None:
            return False
        x0, y0, x1, y1 = self.window
        return any(x in (x0, x1) or y in (y0, y1) for x, y in (self.points[0], self.points[-1]))

    def axis_hits(self, p: Point, direction: str) -> list[Point]:
        """Path points on the open axis ray from p, nearest first."""
        dx, dy = AXES[direction]
        a, b = p
        hits = []
        for q in self.points:
            if dx and q[1] == b and (q[0] - a) * dx > 0:
                hits.append(q)
            elif dy and q[0] == a and (q[1] - b) * dy > 0:
                hits.append(q)
        hits.sort(key=lambda q: abs(q[0] - a) + abs(q[1] - b))
        return hits


@dataclass(frozen=True)
class Cross:
    p: Point
    n: int
    xp: Point
    xm: Point
    yp: Point
    ym: Point

    @property
    def points(self) -> tuple[Point, Point, Point, Point]:
        return self.xp, self.xm, self.yp, self.ym

    @property
    def horizontal(self) -> tuple[Point, Point]:
        return self.xm, self.xp

    @property
    def vertical(self) -> tuple[Point, Point]:
        return self.ym, self.yp


def nth_cross(path: LatticePath, p: Point, n: int) -> Cross:
    if n < 1:
        raise ValueError("n must be >= 1")
    if p not in path.index:
        raise ValueError("p is not on the path")
    got = {}
    for d in AXES:
        hits = path.axis_hits(p, d)
        if len(hits) < n:
            raise CrossUnavailable(d, len(hits), n, path.truncated)
        got[d] = hits[n - 1]
    return Cross(p, n, got["x+"], got["x-"], got["y+"], got["y-"])


@dataclass(frozen=True)
class Snail:
    p: Point
    n: int
    start: int  # index range [start, end] of the subpath
    end: int
    cross: Cross

    @property
    def length(self) -> int:
        return self.end - self.start

    def vertices(self, path: LatticePath) -> list[Point]:
        return path.points[self.start:self.end + 1]

    def edge_set(self, path: LatticePath) -> set[frozenset]:
        pts = path.points
        return {frozenset((pts[i], pts[i + 1])) for i in range(self.start, self.end)}


def nth_snail(path: LatticePath, p: Point, n: int) -> Snail:
    c = nth_cross(path, p, n)
    # every path point on the two cross segments, not just the endpoints
    idx = [path.index[p]]
    for d in AXES:
        idx += [path.index[q] for q in path.axis_hits(p, d)[:n]]
    return Snail(p, n, min(idx), max(idx), c)


def _segments_cross(h: tuple[Point, Point], v: tuple[Point, Point]) -> Point | None:
    """Intersection point of a horizontal and a vertical segment, if any."""
    (hx0, hy), (hx1, _) = h
    (vx, vy0), (_, vy1) = v
    lo, hi = min(hx0, hx1), max(hx0, hx1)
    blo, bhi = min(vy0, vy1), max(vy0, vy1)
    if lo <= vx <= hi and blo <= hy <= bhi:
        return vx, hy
    return None


def crosses_meet(a: Cross, b: Cross) -> Point | None:
    """Point where a segment of one cross meets a perpendicular segment of the other."""
    return _segments_cross(a.horizontal, b.vertical) or _segments_cross(b.horizontal, a.vertical)


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class CrossLemmaResult:
    holds: bool
    shared: Point | None
    distance: int
    bound: int
    meet: Point


def check_cross_lemma(path: LatticePath, p: Point, q: Point, n: int, m: int) -> CrossLemmaResult:
    """Snails of p and q share a vertex and their path distance is within the
    sum of the snail lengths, whenever the two crosses meet perpendicularly."""
    sp = nth_snail(path, p, n)
    sq = nth_snail(path, q, m)
    meet = crosses_meet(sp.cross, sq.cross)
    if meet is None:
        raise PreconditionError("crosses do not meet perpendicularly")
    lo, hi = max(sp.start, sq.start), min(sp.end, sq.end)
    shared = path.points[lo] if lo <= hi else None
    dist = abs(path.index[p] - path.index[q])
    bound = sp.length + sq.length
    return CrossLemmaResult(shared is not None and dist <= bound, shared, dist, bound, meet)


@dataclass(frozen=True)
class RayCrossing:
    point: tuple[Fraction, Fraction]
    distance: Fraction  # ray parameter s, point = p + s * direction
    index: Fraction     # position along the path; integer at vertices
    tag: str            # base, past or future


def ray_intersections(path: LatticePath, p: Point, direction: str | tuple[int, int]) -> list[RayCrossing]:
    """Crossings of the ray from p with the path's polygonal curve, exactly.

    ``direction`` is an axis name or an integer vector (a, b).  Segments
    lying along the ray contribute their lattice endpoints.
    """
    if p not in path.index:
        raise ValueError("p is not on the path")
    a, b = AXES[direction] if isinstance(direction, str) else direction
    if (a, b) == (0, 0):
        raise ValueError("zero direction")
    px, py = p
    ip = path.index[p]
    found: dict[tuple[Fraction, Fraction], RayCrossing] = {}

    def add(s: Fraction, idx: Fraction) -> None:
        pt = (px + s * a, py + s * b)
        if pt in found:
            return
        if idx == ip:
            tag = "base"
        else:
            tag = "past" if idx < ip else "future"
        found[pt] = RayCrossing(pt, s, idx, tag)

    pts = path.points
    for k, (x0, y0) in enumerate(pts):
        # vertex on the ray
        dx, dy = x0 - px, y0 - py
        if dx * b - dy * a == 0 and dx * a + dy * b >= 0:
            s = Fraction(dx * a + dy * b, a * a + b * b)
            add(s, Fraction(k))
        if k + 1 == len(pts):
            break
        x1, y1 = pts[k + 1]
        ex, ey = x1 - x0, y1 - y0
        den = a * ey - b * ex
        if den == 0:
            continue  # parallel; collinear overlap is covered by the vertex test
        # p + s (a, b) = (x0, y0) + u (ex, ey)
        s = Fraction((x0 - px) * ey - (y0 - py) * ex, den)
        u = Fraction((x0 - px) * b - (y0 - py) * a, den)
        if s >= 0 and 0 < u < 1:
            add(s, k + u)
    return sorted(found.values(), key=lambda c: c.distance)


def square_spiral(turns: int, start: Point = (0, 0)) -> list[Point]:
    """Outward square spiral: legs of lengths 1, 1, 2, 2, 3, 3, ... turning left,
    starting east.  ``turns`` full windings use 4 * turns legs."""
    x, y = start
    pts = [(x, y)]
    dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    for leg in range(4 * turns):
        dx, dy = dirs[leg % 4]
        for _ in range(leg // 2 + 1):
            x, y = x + dx, y + dy
            pts.append((x, y))
    return pts


def snake_path(width: int, height: int, origin: Point = (0, 0)) -> list[Point]:
    """Boustrophedon path covering a width x height block."""
    ox, oy = origin
    pts = []
    for y in range(height):
        xs = range(width) if y % 2 == 0 else range(width - 1, -1, -1)
        pts.extend((ox + x, oy + y) for x in xs)
    return pts


def random_block_path(width: int, height: int, moves: int, seed: int, origin: Point = (0, 0)) -> list[Point]:
    """Self-avoiding path covering a block, randomized by backbite moves."""
    from .rng import generator

    rng = generator(seed, "paths")
    path = snake_path(width, height)
    ox, oy = origin
    for _ in range(moves):
        if rng.random() < 0.5:
            path.reverse()
        x, y = path[-1]
        nbrs = [(x + dx, y + dy) for dx, dy in AXES.values()
                if 0 <= x + dx < width and 0 <= y + dy < height]
        w = nbrs[int(rng.integers(len(nbrs)))]
        i = path.index(w)
        if i == len(path) - 2:
            continue
        path[i + 1:] = path[:i:-1]
    return [(ox + x, oy + y) for x, y in path]
