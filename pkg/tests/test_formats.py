import json
import math

import numpy as np
from hypothesis import given, strategies as st

from glassdyn import formats
from glassdyn.disorder import constant_coupling, sample_couplings
from glassdyn.forests import sample_directed_forest
from glassdyn.glauber import random_spins, run_glauber
from glassdyn.graphs import build_cylinder, build_square_window, complete_graph
from glassdyn.groundstate import enumerate_ground_states
from glassdyn.loops import enumerate_dual_loops


@given(st.floats(allow_nan=False))
def test_float_repr_roundtrip(x):
    assert float(formats.fmt_float(x)) == x


def test_nonfinite_floats():
    assert formats.fmt_float(math.inf) == "inf" and formats.fmt_float(math.nan) == "nan"
    assert json.loads(formats.dumps({"x": math.inf}))["x"] == "inf"


def test_window_roundtrip():
    w = build_square_window(5, 4, "fixed", [1, -1] * 10)
    back = formats.load_graph(formats.dump_graph(w))
    assert (back.width, back.height, back.boundary, back.xi) == (5, 4, "fixed", w.xi)
    assert back.graph.edges == w.graph.edges


def test_graph_roundtrip():
    g = build_cylinder(complete_graph(4), 0, 3)
    back = formats.load_graph(formats.dump_graph(g))
    assert back.n == g.n and back.edges == g.edges and back.kind == g.kind


@given(st.integers(0, 2**32))
def test_coupling_roundtrip_is_bit_exact(seed):
    g = build_square_window(5, 5).graph
    J = sample_couplings(g, "gaussian:1.0", seed)
    back = formats.load_coupling(formats.dump_coupling(J), g)
    assert np.array_equal(back.values, J.values)
    assert str(back.descriptor) == str(J.descriptor) and back.seed == seed


def test_loops_roundtrip():
    w = build_square_window(6, 6)
    loops = enumerate_dual_loops(w, 8)
    back = formats.load_loops(formats.dump_loops(loops), w)
    assert [lp.faces for lp in back] == [lp.faces for lp in loops]


def test_report_roundtrip():
    w = build_square_window(3, 3)
    rep = enumerate_ground_states(w.graph, sample_couplings(w.graph, "gaussian:1.0", 1))
    text = formats.report_to_json(rep)
    back = formats.report_from_json(text)
    assert back.energy == rep.energy
    assert [list(s) for s in back.minimizers] == [list(s) for s in rep.minimizers]
    assert formats.report_to_json(back) == text


def test_forest_roundtrip():
    f = sample_directed_forest(9, 7, 0.4, 2)
    back = formats.load_forest(formats.dump_forest(f))
    assert (back.width, back.height) == (9, 7) and np.array_equal(back.parent, f.parent)


def test_run_csvs():
    w = build_square_window(4, 4)
    rec = run_glauber(w.graph, constant_coupling(w.graph), random_spins(w.n, 1), None, 10.0, 1)
    rows = formats.run_counters_csv(rec).splitlines()
    assert rows[0] == "vertex,flips,energy_reducing_flips,last_flip_time,final_spin"
    assert len(rows) == w.n + 1
    ev = formats.run_events_csv(rec).splitlines()
    assert len(ev) == rec.n_events + 1
    times = [float(r.split(",")[0]) for r in ev[1:]]
    assert times == list(rec.events_t)


def test_spin_bits():
    s = np.array([1, -1, -1, 1])
    assert formats.spin_bits(s) == "1001"
    assert list(formats.bits_spins("1001")) == list(s)
