from hypothesis import given, strategies as st

from glassdyn.graphs import build_square_window
from glassdyn.loops import (
    canonical_form,
    canonical_loop_type,
    enumerate_dual_loops,
    loop_from_points,
    loop_types,
    polygon_shapes,
    predicted_loop_count,
    type_census,
)

STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _animals(max_size):
    """Fixed lattice animals up to translation, grown cell by cell."""
    level = {frozenset([(0, 0)])}
    out = set(level)
    for _ in range(max_size - 1):
        nxt = set()
        for a in level:
            for x, y in a:
                for dx, dy in STEPS:
                    q = (x + dx, y + dy)
                    if q not in a:
                        b = a | {q}
                        mx, my = min(p[0] for p in b), min(p[1] for p in b)
                        nxt.add(frozenset((p[0] - mx, p[1] - my) for p in b))
        out |= nxt
        level = nxt
    return out


def _perimeter(cells):
    return sum((x + dx, y + dy) not in cells for x, y in cells for dx, dy in STEPS)


def _oracle_count(w, h, max_length):
    # loops of length <= 8 enclose hole-free animals of at most 4 cells
    total = 0
    for a in _animals(4):
        if _perimeter(a) <= max_length:
            aw = max(x for x, _ in a) + 1
            ah = max(y for _, y in a) + 1
            total += max(0, w - 2 - aw + 1) * max(0, h - 2 - ah + 1)
    return total


@given(st.integers(2, 8), st.integers(2, 8))
def test_count_matches_animal_oracle(w, h):
    win = build_square_window(w, h)
    loops = enumerate_dual_loops(win, 8)
    assert len(loops) == _oracle_count(w, h, 8) == predicted_loop_count(win, 8)


def test_plaquettes():
    win = build_square_window(6, 5)
    loops = enumerate_dual_loops(win, 4)
    assert len(loops) == 4 * 3


def test_crossed_edges_are_the_enclosed_boundary():
    win = build_square_window(7, 7)
    g = win.graph
    for lp in enumerate_dual_loops(win, 10):
        cut = {g.edge_id(u, v) for u in lp.enclosed for v in g.neighbors[u] if v not in lp.enclosed}
        assert cut == set(lp.edges)
        assert len(lp.edges) == lp.length
        assert lp.area == len(lp.enclosed) >= 1


def test_shape_table():
    shapes = polygon_shapes(8)
    by_len = {}
    for s in shapes:
        by_len[len(s)] = by_len.get(len(s), 0) + 1
    assert by_len == {4: 1, 6: 2, 8: 7}


def test_five_types_up_to_length_8():
    loops = enumerate_dual_loops(build_square_window(9, 9), 8)
    types = loop_types(loops)
    assert len(types) == 5
    assert sorted(t.orientations for t in types.values()) == [1, 1, 2, 2, 4]


def test_census_is_exact_away_from_boundary():
    win = build_square_window(13, 13)
    loops = enumerate_dual_loops(win, 8)
    census = type_census(loops, win.vid(6, 6))
    assert all(not trunc and seen == expected for seen, expected, trunc in census.values())
    corner = type_census(loops, win.vid(0, 0))
    assert any(trunc for _, _, trunc in corner.values())


SYMS = [(1, 0, 0, 1), (0, -1, 1, 0), (-1, 0, 0, -1), (0, 1, -1, 0),
        (-1, 0, 0, 1), (1, 0, 0, -1), (0, 1, 1, 0), (0, -1, -1, 0)]

loop_pool = enumerate_dual_loops(build_square_window(8, 8), 10)


@given(st.sampled_from(loop_pool), st.sampled_from(SYMS), st.integers(-5, 5), st.integers(-5, 5),
       st.integers(0, 20), st.booleans())
def test_canonical_form_invariance(lp, sym, tx, ty, shift, rev):
    a, b, c, d = sym
    pts = [(a * x + b * y + tx, c * x + d * y + ty) for x, y in lp.points]
    k = shift % len(pts)
    pts = pts[k:] + pts[:k]
    if rev:
        pts.reverse()
    assert canonical_form(pts) == canonical_form(lp.points)


def test_loop_from_points_roundtrip():
    win = build_square_window(6, 6)
    for lp in enumerate_dual_loops(win, 8):
        again = loop_from_points(win, list(lp.points))
        assert again.faces == lp.faces
        assert canonical_loop_type(again).length == lp.length
