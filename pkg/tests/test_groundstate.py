import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from glassdyn.disorder import constant_coupling, custom_coupling, sample_couplings
from glassdyn.glauber import energy
from glassdyn.graphs import Graph, build_regular_tree, build_square_window, cycle_graph, path_graph
from glassdyn.groundstate import (
    BudgetExceeded,
    check_torus_unique_gsp,
    connected_subsets,
    construct_tree_flip_gsp,
    domain_walls,
    enumerate_ground_states,
    plaquette_frustration_check,
    sample_tree_invariant_gsp,
    unsatisfied_subgraph,
    verify_local_ground_state,
)


def _brute(graph, J):
    best, arg = np.inf, []
    for bits in itertools.product([1, -1], repeat=graph.n - 1):
        s = np.array((1,) + bits)
        e = energy(graph, J, s)
        if e < best - 1e-12:
            best, arg = e, [s]
        elif e <= best + 1e-12:
            arg.append(s)
    return best, arg


def test_path_of_three():
    g = path_graph(3)
    rep = enumerate_ground_states(g, constant_coupling(g))
    assert rep.energy == -2.0 and len(rep.minimizers) == 1 and not rep.degenerate


def test_frustrated_triangle():
    g = cycle_graph(3)
    J = custom_coupling(g, [1.0, 1.0, -1.0])
    rep = enumerate_ground_states(g, J)
    assert rep.energy == -1.0 and len(rep.minimizers) == 3 and rep.degenerate


@given(st.integers(0, 2**32))
def test_matches_brute_force(seed):
    g = build_square_window(3, 3).graph
    J = sample_couplings(g, "gaussian:1.0", seed)
    rep = enumerate_ground_states(g, J)
    best, arg = _brute(g, J)
    assert rep.energy == pytest.approx(best, abs=1e-12)
    assert sorted(map(tuple, rep.minimizers)) == sorted(map(tuple, arg))


def test_size_guard():
    g = path_graph(40)
    with pytest.raises(BudgetExceeded):
        enumerate_ground_states(g, constant_coupling(g))


def test_gaussian_4x4_unique_and_forest():
    w = build_square_window(4, 4)
    for seed in range(20):
        J = sample_couplings(w.graph, "gaussian:1.0", seed)
        rep = enumerate_ground_states(w.graph, J)
        assert not rep.degenerate
        s = rep.minimizers[0]
        assert unsatisfied_subgraph(s, J, w).forest
        for K in (1, 2, 4):
            assert verify_local_ground_state(s, J, w.graph, K).passed


def test_connected_subsets_against_networkx():
    import networkx as nx

    g = build_square_window(3, 3).graph
    G = nx.Graph(g.edges)
    brute = set()
    for k in range(1, 5):
        for c in itertools.combinations(range(g.n), k):
            if nx.is_connected(G.subgraph(c)):
                brute.add(frozenset(c))
    got = [frozenset(s) for s, _ in connected_subsets(g, 4)]
    assert len(got) == len(set(got))
    assert set(got) == brute


def test_local_verification_witness():
    w = build_square_window(4, 4)
    J = constant_coupling(w.graph)
    s = np.ones(w.n, dtype=int)
    assert verify_local_ground_state(s, J, w.graph, 5).passed
    v = w.vid(1, 2)
    s[v] = -1
    chk = verify_local_ground_state(s, J, w.graph, 1)
    assert not chk.passed and chk.witness == (v,)
    with pytest.raises(ValueError):
        verify_local_ground_state(s, J, w.graph, 0)


def test_unsatisfied_plaquette_cycle():
    w = build_square_window(3, 3)
    J = constant_coupling(w.graph)
    s = np.ones(w.n, dtype=int)
    assert unsatisfied_subgraph(s, J, w).edges == ()
    s[w.vid(1, 1)] = -1
    u = unsatisfied_subgraph(s, J, w)
    assert len(u.edges) == 4 and not u.forest


def test_frustration():
    w = build_square_window(4, 4)
    J = constant_coupling(w.graph)
    assert plaquette_frustration_check(J, w).frustrated == ()
    e = w.face_edges(4)[0]
    chk = plaquette_frustration_check(J.with_value(e, -1.0), w)
    assert 4 in chk.frustrated and chk.invariant


def test_frustration_density():
    w = build_square_window(8, 8)
    frac = np.mean([len(plaquette_frustration_check(sample_couplings(w.graph, "gaussian:1.0", s), w).frustrated)
                    / w.n_faces for s in range(50)])
    assert abs(frac - 0.5) <= 0.05


def test_domain_wall_trivial():
    w = build_square_window(4, 4)
    s = np.where(np.arange(w.n) % 3 == 0, 1, -1)
    assert domain_walls(s, s, w).edges == ()
    assert domain_walls(s, -s, w).edges == ()


def test_domain_wall_membership_rule():
    w = build_square_window(5, 5)
    rng = np.random.default_rng(0)
    a, b = rng.choice([-1, 1], w.n), rng.choice([-1, 1], w.n)
    same = a == b
    wall = set(domain_walls(a, b, w).edges)
    for e, (x, y) in enumerate(w.graph.edges):
        assert (e in wall) == (same[x] != same[y])


def test_walls_between_degenerate_minimizers_are_open():
    # unit couplings with two frustrated plaquettes: many minimizers
    w = build_square_window(4, 3)
    J = constant_coupling(w.graph).with_value(w.face_edges(0)[0], -1.0).with_value(w.face_edges(2)[2], -1.0)
    rep = enumerate_ground_states(w.graph, J)
    assert rep.degenerate
    for a, b in itertools.combinations(rep.minimizers, 2):
        dw = domain_walls(a, b, w)
        assert dw.edges and not dw.has_closed_loop


def test_torus():
    w3 = build_square_window(3, 3, "periodic")
    rep = check_torus_unique_gsp(w3, constant_coupling(w3.graph))
    assert rep.energy == -18.0 and rep.flags["monochromatic_pair_only"]
    w4 = build_square_window(4, 4, "periodic")
    rep = check_torus_unique_gsp(w4, constant_coupling(w4.graph))
    assert rep.energy == -32.0 and len(rep.minimizers) == 1
    J = constant_coupling(w3.graph).with_value(0, -1.0)
    rep = check_torus_unique_gsp(w3, J)
    best, arg = _brute(w3.graph, J)
    assert rep.energy == best > -18.0
    assert len(rep.minimizers) == len(arg)
    with pytest.raises(ValueError):
        check_torus_unique_gsp(build_square_window(3, 3), constant_coupling(w3.graph))


def test_tree_flip_absent_without_light_edges():
    t = build_regular_tree(3, 4)
    assert construct_tree_flip_gsp(t, constant_coupling(t), 0.5, 3) is None


def test_tree_flip_construction():
    t = build_regular_tree(3, 6)
    found = 0
    for seed in range(30):
        J = sample_couplings(t, "gaussian:1.0", seed)
        h = float(np.quantile(np.abs(J.values), 0.05))
        res = construct_tree_flip_gsp(t, J, h, 4)
        if res is None:
            continue
        found += 1
        assert res.check.passed
        unsat = [e for e, (x, y) in enumerate(t.edges) if J.values[e] * res.config[x] * res.config[y] < 0]
        assert unsat == [res.edge]
    assert found >= 9
    with pytest.raises(ValueError):
        construct_tree_flip_gsp(cycle_graph(4), constant_coupling(cycle_graph(4)), 0.5, 2)


def test_invariant_tree_sample():
    t = build_regular_tree(4, 5)
    J = sample_couplings(t, "positive:exponential:1.0", 2)
    low = float(J.values.min()) / 2
    s = sample_tree_invariant_gsp(t, J, low, 1, 4)
    assert s.free_edges == () and s.unsatisfied == ()
    eps = float(np.quantile(J.values, 0.01))
    a = sample_tree_invariant_gsp(t, J, eps, 7, 5)
    b = sample_tree_invariant_gsp(t, J, eps, 7, 5)
    assert np.array_equal(a.config, b.config)
    for seed in range(10):
        assert sample_tree_invariant_gsp(t, sample_couplings(t, "positive:exponential:1.0", seed),
                                         eps, seed, 5).check.passed
