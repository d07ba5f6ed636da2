import networkx as nx
import pytest
from hypothesis import given, strategies as st

from glassdyn.graphs import (
    build_cylinder,
    build_regular_tree,
    build_shared_clique_pair,
    build_square_window,
    complete_graph,
    cycle_graph,
    from_recipe,
)


def test_small_free_window():
    w = build_square_window(2, 2)
    assert (w.graph.n, w.graph.m) == (4, 4)
    assert w.outer_face == 1


def test_periodic_window_edge_count():
    assert build_square_window(3, 3, "periodic").graph.m == 18


def test_window_face_count():
    assert build_square_window(5, 4).outer_face == 12


def test_periodic_too_small_rejected():
    with pytest.raises(ValueError):
        build_square_window(2, 5, "periodic")


def test_regular_tree_size():
    t = build_regular_tree(4, 5)
    assert t.n == 1 + 4 * sum(3**k for k in range(5))
    assert t.n == 485
    assert t.m == t.n - 1


def test_cylinder_over_triangle():
    g = build_cylinder(complete_graph(3), -2, 2)
    assert g.n == 15
    assert {g.degree(v) for v in range(g.n) if g.labels["level"][v] not in (-2, 2)} == {4}


def test_shared_clique_pair():
    g = build_shared_clique_pair(5)
    # two K5 glued at one vertex: 2 * C(5, 2) edges
    assert (g.n, g.m) == (9, 20)
    assert g.degree(0) == 8
    assert build_shared_clique_pair(4).degree(0) == 6


@given(st.integers(2, 7), st.integers(2, 7), st.sampled_from(["free", "fixed"]))
def test_window_duality(w, h, mode):
    win = build_square_window(w, h, mode)
    g = win.graph
    assert g.m == (w - 1) * h + w * (h - 1)
    # Euler: V - E + F = 2 with the outer face
    assert g.n - g.m + win.n_faces + 1 == 2
    # every edge separates two faces, every inner face has four edges
    assert len(win.dual_edges) == g.m
    for f in range(win.n_faces):
        assert len(win.face_edges(f)) == 4


@given(st.integers(3, 6), st.integers(3, 6))
def test_torus_is_four_regular(w, h):
    g = build_square_window(w, h, "periodic").graph
    assert all(g.degree(v) == 4 for v in range(g.n))


@given(st.integers(3, 6), st.integers(1, 4))
def test_tree_matches_networkx(d, depth):
    t = build_regular_tree(d, depth)
    G = nx.Graph(t.edges)
    assert nx.is_tree(G)
    assert max(dict(G.degree).values()) == d


def test_recipes():
    assert from_recipe("window:5x4").graph.n == 20
    assert from_recipe("cylinder:C5:0:12").n == 65
    assert from_recipe("cylinder:pair4:-2:2").n == 35
    assert from_recipe("cycle:6").m == 6
    with pytest.raises(ValueError):
        from_recipe("mobius:3")


def test_cycle_graph_degree():
    g = cycle_graph(5)
    assert all(g.degree(v) == 2 for v in range(5))
