import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from glassdyn.disorder import (
    Descriptor,
    cluster_sizes,
    constant_coupling,
    custom_coupling,
    find_choking_cycle,
    find_fixed_spanning_tree,
    fixed_edges,
    fixing_probability,
    is_fixed_edge,
    majority_recolor,
    sample_coloring,
    sample_couplings,
)
from glassdyn.graphs import Graph, build_cylinder, build_regular_tree, build_square_window, complete_graph, path_graph
from glassdyn.groundstate import enumerate_ground_states


def test_constant_and_determinism():
    g = build_square_window(4, 4).graph
    assert np.all(sample_couplings(g, "constant:1", 3).values == 1.0)
    a = sample_couplings(g, "gaussian:1.0", 11).values
    b = sample_couplings(g, "gaussian:1.0", 11).values
    assert np.array_equal(a, b)


def test_gaussian_law():
    g = build_square_window(72, 72).graph
    assert g.m >= 10_000
    v = sample_couplings(g, Descriptor("gaussian", 1.0), 5).values
    assert abs(v.mean()) < 0.05
    assert abs((v > 0).mean() - 0.5) < 0.02


def test_descriptor_parse():
    assert str(Descriptor.parse("gaussian:2.0")) == "gaussian:2.0"
    assert Descriptor.parse("positive:exponential:1.0").law == "exponential"
    with pytest.raises(ValueError):
        Descriptor.parse("cauchy:1")


def test_fixed_edge_examples():
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    J = custom_coupling(star, [10.0, 1.5, 1.5])
    assert is_fixed_edge(J, (0, 1))
    grid = build_square_window(3, 3).graph
    centre = 4
    assert not is_fixed_edge(constant_coupling(grid), grid.incident_edges(centre)[0])


@given(st.integers(0, 10_000), st.floats(1.0, 10.0))
def test_fixed_edge_monotone_in_weight(seed, factor):
    g = build_square_window(3, 3).graph
    J = sample_couplings(g, "gaussian:1.0", seed)
    for e in range(g.m):
        if is_fixed_edge(J, e):
            assert is_fixed_edge(J.with_value(e, J.values[e] * factor), e)


@given(st.integers(0, 10_000))
def test_fixed_edges_satisfied_in_ground_states(seed):
    g = build_square_window(3, 3).graph
    J = sample_couplings(g, "gaussian:1.0", seed)
    rep = enumerate_ground_states(g, J)
    for s in rep.minimizers:
        for e in fixed_edges(J):
            u, v = g.edges[e]
            assert J.values[e] * s[u] * s[v] > 0


def test_fixed_tree_examples():
    g = build_cylinder(path_graph(2), -1, 1)
    lev = g.labels["level"]
    mid = [v for v in range(g.n) if lev[v] == 0]
    vals = np.full(g.m, 0.01)
    vals[g.edge_id(*mid)] = 100.0
    t = find_fixed_spanning_tree(custom_coupling(g, vals), mid)
    assert t is not None and t.edges == (g.edge_id(*mid),)
    assert find_fixed_spanning_tree(constant_coupling(g), mid) is None
    with pytest.raises(ValueError):
        find_fixed_spanning_tree(constant_coupling(g), [mid[0], [v for v in range(g.n) if lev[v] == 1][1]])


@given(st.integers(0, 3000))
def test_fixed_tree_pins_slice_in_ground_states(seed):
    g = build_cylinder(complete_graph(3), -1, 1)
    J = sample_couplings(g, "gaussian:1.0", seed)
    sl = [v for v in range(g.n) if g.labels["level"][v] == 0]
    if find_fixed_spanning_tree(J, sl) is None:
        return
    rep = enumerate_ground_states(g, J)
    patterns = {tuple(int(s[v] * s[sl[0]]) for v in sl) for s in rep.minimizers}
    assert len(patterns) == 1


def test_two_vertex_slice_matches_direct_criterion():
    g = build_cylinder(path_graph(2), -1, 1)
    lev = g.labels["level"]
    sl = [v for v in range(g.n) if lev[v] == 0]
    e = g.edge_id(*sl)
    others = [f for v in sl for f in g.incident_edges(v) if f != e]
    hits = 0
    for seed in range(2000):
        J = sample_couplings(g, "gaussian:1.0", seed)
        a = np.abs(J.values)
        expect = a[e] > a[others].sum()
        got = find_fixed_spanning_tree(J, sl) is not None
        assert got == expect
        hits += got
    assert 0 < hits < 2000
    assert fixing_probability(lambda s: sample_couplings(g, "gaussian:1.0", s), sl, 2000) == hits / 2000


def test_choking_cycle_centre_of_5x5():
    w = build_square_window(5, 5)
    c = find_choking_cycle(w, w.vid(2, 2), 25)
    assert c is not None
    ring = {w.vid(x, y) for x in (1, 2, 3) for y in (1, 2, 3)} - {w.vid(2, 2)}
    assert set(c.vertices) == ring
    # 8 ring edges, 4 spokes to the centre, 12 edges leaving the ring
    assert c.touching_edges == 24
    assert c.enclosed == 1


def test_choking_cycle_absent_cases():
    w = build_square_window(5, 5)
    assert find_choking_cycle(w, w.vid(2, 2), 1) is None
    assert find_choking_cycle(w, w.vid(0, 2), 100) is None
    assert find_choking_cycle(w, w.vid(2, 2), 24) is None


def test_majority_extremes():
    t = build_regular_tree(3, 3)
    assert majority_recolor(t, np.ones(t.n, bool)).all()
    assert not majority_recolor(t, np.zeros(t.n, bool)).any()


def test_majority_density_dominates():
    t = build_regular_tree(4, 6)
    p = 0.96
    red = np.mean([majority_recolor(t, sample_coloring(t, p, s)).mean() for s in range(20)])
    assert red >= p**2


def test_cluster_sizes_trivial():
    g = path_graph(5)
    assert cluster_sizes(g, np.zeros(5, bool)) == []
    assert cluster_sizes(g, np.ones(5, bool)) == [5]


def test_cluster_sizes_against_brute_force():
    g = path_graph(5)
    for bits in itertools.product([0, 1], repeat=5):
        runs, cur = [], 0
        for b in bits + (0,):
            if b:
                cur += 1
            elif cur:
                runs.append(cur)
                cur = 0
        assert cluster_sizes(g, np.array(bits, bool)) == sorted(runs, reverse=True)
