"""Named, seeded experiments with pass/fail assertions.

Each experiment runs ``replicas`` independent units.  Unit ``i`` gets seed
``replica_seed(master, i)``; rows are reduced in index order, so the result
does not depend on how many worker processes ran the units.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache, partial
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import formats
from .config import ExperimentConfig
from .disorder import (
    constant_coupling,
    fixed_edges,
    majority_recolor,
    cluster_sizes,
    sample_coloring,
    sample_couplings,
)
from .forests import (
    column_forest,
    count_boundary_path_edges,
    mt_estimate,
    sample_directed_forest,
)
from .geometry import (
    CrossUnavailable,
    LatticePath,
    PreconditionError,
    check_cross_lemma,
    random_block_path,
)
from .glauber import (
    classify_freezing,
    run_coupled_monotone,
    run_glauber,
    random_spins,
    strongly_freezing_probability,
    BoundaryCondition,
)
from .graphs import (
    build_cylinder,
    build_regular_tree,
    build_shared_clique_pair,
    build_square_window,
    complete_graph,
    cycle_graph,
    tree_subtree_of,
)
from .groundstate import (
    check_torus_unique_gsp,
    construct_tree_flip_gsp,
    enumerate_ground_states,
    unsatisfied_subgraph,
    plaquette_frustration_check,
)
from .loopdyn import (
    LoopSystem,
    crossing_shift,
    dependency_cluster,
    perturbation_margin,
    positive_loops,
    replay_with_shift,
    run_loop_dynamics,
)
from .loops import enumerate_dual_loops, loop_types, loops_enclosing, polygon_shapes
from .rng import derive, generator, replica_seed


@dataclass(frozen=True)
class Experiment:
    name: str
    reference: str
    budget: str
    defaults: dict
    unit: Callable[[dict, int, int], dict]
    reduce: Callable[[dict, list[dict]], tuple[dict, bool]]


REGISTRY: dict[str, Experiment] = {}


def experiment(name: str, reference: str, budget: str, **defaults):
    def wrap(pair):
        unit, reduce = pair
        REGISTRY[name] = Experiment(name, reference, budget, defaults, unit, reduce)
        return pair
    return wrap


def _mean(xs) -> float:
    return float(np.mean(xs)) if len(xs) else math.nan


# shared builders, cached per process

@lru_cache(maxsize=None)
def _cylinder_pair(n: int, low: int, high: int):
    g = build_cylinder(build_shared_clique_pair(n), low, high)
    level, copy = g.labels["level"], g.labels["copy"]
    s = np.empty(g.n, dtype=np.int8)
    for v in range(g.n):
        if level[v] < 0:
            s[v] = 1
        elif level[v] > 0:
            s[v] = -1
        else:
            s[v] = 1 if copy[v] == 2 else -1
    shared = next(v for v in range(g.n) if level[v] == 0 and g.labels["shared"][v])
    return g, constant_coupling(g), s, shared


def _nonfreezing_unit(p: dict, i: int, seed: int) -> dict:
    g, J, s0, shared = _cylinder_pair(p["n"], p["low"], p["high"])
    rec = run_glauber(g, J, s0, None, p["horizon"], seed, watch=[shared])
    log = rec.ring_log[shared]
    others = int(rec.flips.sum() - rec.flips[shared])
    return {"shared_flips": int(rec.flips[shared]), "other_flips": others,
            "shared_rings": len(log), "nonzero_tie_rings": sum(1 for r in log if r[1] != 0)}


def _nonfreezing_reduce(p: dict, rows: list[dict]) -> tuple[dict, bool]:
    mean = _mean([r["shared_flips"] for r in rows])
    other = max(r["other_flips"] for r in rows)
    nz = sum(r["nonzero_tie_rings"] for r in rows)
    ok = other == 0 and 40 <= mean <= 60 and nz == 0
    return {"mean_shared_flips": mean, "max_other_flips": other, "nonzero_dh_shared_rings": nz}, ok


experiment("nonfreezing-cylinder",
           "cylinder over two cliques sharing a vertex: the shared vertex never freezes",
           "~1 s", n=4, low=-2, high=2, replicas=200, horizon=100.0)((_nonfreezing_unit, _nonfreezing_reduce))


@lru_cache(maxsize=None)
def _tie_tree(degree: int, depth: int):
    g = build_regular_tree(degree, depth)
    sign = np.array([0] + [1 if tree_subtree_of(g, v) < degree // 2 else -1 for v in range(1, g.n)])
    leaves = [v for v in range(g.n) if g.labels["boundary"][v]]
    return g, constant_coupling(g), sign, {v: int(sign[v]) for v in leaves}


def _tie_unit(p: dict, i: int, seed: int) -> dict:
    g, J, sign, pinned = _tie_tree(p["degree"], p["depth"])
    s0 = sign.copy()
    s0[0] = 1 if derive(seed, "spins") >> 63 else -1
    rec = run_glauber(g, J, s0, pinned, p["horizon"], seed, watch=[0])
    log = rec.ring_log[0]
    return {"root_flips": int(rec.flips[0]), "neighbor_flips": int(rec.flips[list(g.neighbors[0])].sum()),
            "root_rings": len(log), "non_tie_root_rings": sum(1 for r in log if r[1] != 0)}


def _tie_reduce(p, rows):
    flipped = sum(r["root_flips"] >= 1 for r in rows)
    nb = max(r["neighbor_flips"] for r in rows)
    nt = sum(r["non_tie_root_rings"] for r in rows)
    need = math.ceil(0.95 * len(rows))
    return {"replicas_root_flipped": flipped, "max_neighbor_flips": nb, "non_tie_root_rings": nt,
            "mean_root_flips": _mean([r["root_flips"] for r in rows])}, nb == 0 and flipped >= need and nt == 0


experiment("evenTree-tie",
           "regular trees of even degree need not freeze: balanced pinned subtrees keep the root tied",
           "<1 s", degree=4, depth=2, replicas=100, horizon=100.0)((_tie_unit, _tie_reduce))


@lru_cache(maxsize=None)
def _torus(side: int):
    w = build_square_window(side, side, "periodic")
    return w, constant_coupling(w.graph)


def _monotone_unit(p, i, seed):
    w, J = _torus(p["side"])
    n = w.n
    a, b = random_spins(n, seed, 0), random_spins(n, seed, 1)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    _, _, bad = run_coupled_monotone(w.graph, J, lo, hi, horizon=p["horizon"], seed=seed)
    return {"violations": bad}


def _monotone_reduce(p, rows):
    total = sum(r["violations"] for r in rows)
    return {"pairs": len(rows), "order_violations": total}, total == 0


experiment("monotone-coupling",
           "ferromagnetic dynamics preserve the pointwise order under a shared event stream",
           "~4 s", side=6, replicas=1000, horizon=20.0)((_monotone_unit, _monotone_reduce))


@lru_cache(maxsize=None)
def _slice_cylinder(kind: str, k: int, high: int):
    sl = complete_graph(k) if kind == "K" else cycle_graph(k)
    g = build_cylinder(sl, 0, high)
    return g, constant_coupling(g)


def _slices_unit(p, i, seed):
    row = {}
    for tag, (kind, k, high) in (("K4", ("K", 4, 10)), ("C5", ("C", 5, 12))):
        g, J = _slice_cylinder(kind, k, high)
        lev = g.labels["level"]
        h = derive(seed, "spins", 99)
        bottom, top = (1 if h >> 63 else -1), (1 if (h >> 62) & 1 else -1)
        pinned = {v: bottom for v in range(g.n) if lev[v] <= 1}
        pinned.update({v: top for v in range(g.n) if lev[v] >= high - 1})
        rec = run_glauber(g, J, random_spins(g.n, seed), pinned, p["horizon"], seed)
        rep = classify_freezing(rec, p["trailing"])
        row[f"{tag}_quiet"] = int(not rep.active)
        row[f"{tag}_slice_constant"] = int(bool(rep.slice_constant))
        row[f"{tag}_absorbed_at"] = -1.0 if rec.absorbed_at is None else float(rec.absorbed_at)
    return row


def _slices_reduce(p, rows):
    out = {}
    ok = True
    for tag in ("K4", "C5"):
        good = sum(r[f"{tag}_quiet"] and r[f"{tag}_slice_constant"] for r in rows)
        out[f"{tag}_quiet_slice_constant"] = good
        ok &= good == len(rows)
    return out, ok


experiment("freeze-in-slices",
           "cylinders over complete or cycle slices freeze in slices",
           "<1 s", replicas=50, horizon=1e4, trailing=0.2)((_slices_unit, _slices_reduce))


@lru_cache(maxsize=None)
def _window(w: int, h: int, mode: str = "free"):
    return build_square_window(w, h, mode)


def _unsat_unit(p, i, seed):
    win = _window(p["side"], p["side"])
    J = sample_couplings(win.graph, p["coupling"], seed)
    rep = enumerate_ground_states(win.graph, J)
    s = rep.minimizers[0]
    forest = unsatisfied_subgraph(s, J, win).forest
    fr = plaquette_frustration_check(J, win)
    unsat = set(rep.unsatisfied[0])
    covered = all(any(e in unsat for e in win.face_edges(f)) for f in fr.frustrated)
    return {"forest": int(forest), "unique": int(not rep.degenerate),
            "frustrated_faces": len(fr.frustrated), "frustration_covered": int(covered and fr.invariant)}


def _unsat_reduce(p, rows):
    n = len(rows)
    f = sum(r["forest"] for r in rows)
    u = sum(r["unique"] for r in rows)
    c = sum(r["frustration_covered"] for r in rows)
    return {"forest": f, "unique": u, "frustration_covered": c, "instances": n}, f == u == c == n


experiment("unsat-forest",
           "unsatisfied dual edges of a ground state form a forest",
           "~2 s", side=4, coupling="gaussian:1.0", replicas=100)((_unsat_unit, _unsat_reduce))


def _fixed_unit(p, i, seed):
    win = _window(p["side"], p["side"])
    J = sample_couplings(win.graph, p["coupling"], seed)
    rep = enumerate_ground_states(win.graph, J)
    fe = fixed_edges(J)
    bad = sum(1 for u in rep.unsatisfied for e in u if e in fe)
    return {"fixed_edges": len(fe), "minimizers": len(rep.minimizers), "violations": bad}


def _fixed_reduce(p, rows):
    v = sum(r["violations"] for r in rows)
    return {"fixed_edges_total": sum(r["fixed_edges"] for r in rows), "violations": v}, v == 0


experiment("fixed-edge-consistency",
           "fixed edges are satisfied in every ground state",
           "<1 s", side=3, coupling="gaussian:1.0", replicas=100)((_fixed_unit, _fixed_reduce))


TORUS_ENERGY = {3: -18.0, 4: -32.0}


def _torus_unit(p, i, seed):
    side = p["sides"][i % len(p["sides"])]
    w, J = _torus(side)
    rep = check_torus_unique_gsp(w, J)
    return {"side": side, "energy": rep.energy, "minimizers": len(rep.minimizers),
            "monochromatic_only": int(rep.flags["monochromatic_pair_only"])}


def _torus_reduce(p, rows):
    ok = all(r["monochromatic_only"] and r["energy"] == TORUS_ENERGY.get(r["side"], -2.0 * r["side"] ** 2)
             for r in rows)
    return {f"energy_{r['side']}x{r['side']}": r["energy"] for r in rows}, ok


experiment("torus-unique",
           "with unit couplings on a torus only the monochromatic pair is a ground state",
           "<1 s", sides=(3, 4), replicas=2)((_torus_unit, _torus_reduce))


@lru_cache(maxsize=None)
def _loop_system(side: int, max_length: int, c: float) -> LoopSystem:
    return LoopSystem.build(_window(side, side), max_length, c)


def _budget_unit(p, i, seed):
    sys_ = _loop_system(p["side"], p["max_length"], p["c"])
    tau = p["cluster_budget"] / sys_.schedule.well_defined_sum
    w = sys_.window
    v = w.vid(p["side"] // 2, p["side"] // 2)
    cl = dependency_cluster(sys_, tau, seed, v)
    return {"size": len(cl.vertices), "finite": int(cl.subcritical), "rings": cl.rings}


def _budget_reduce(p, rows):
    mean = _mean([r["size"] for r in rows])
    fin = sum(r["finite"] for r in rows)
    return {"mean_size": mean, "finite": fin, "max_size": max(r["size"] for r in rows)}, \
        fin == len(rows) and mean <= p["mean_cap"]


experiment("loop-budget",
           "loop dynamics are well defined: dependency clusters are subcritical",
           "~1 s", side=21, max_length=8, c=10.0, cluster_budget=0.5, mean_cap=2.4, replicas=1000)(
    (_budget_unit, _budget_reduce))


def _terminal_unit(p, i, seed):
    sys_ = _loop_system(p["side"], p["max_length"], p["c"])
    J = constant_coupling(sys_.window.graph)
    fmin = float(sys_.rates[sys_.rates > 0].min())
    T = p["horizon_factor"] / fmin
    s0 = random_spins(sys_.window.n, seed)
    rec = run_loop_dynamics(sys_, J, s0, T, seed, max_events=p["max_events"])
    last = rec.last_flip_time()
    quiet = rec.truncated_at is None and last < (1 - p["trailing"]) * T
    return {"quiet": int(quiet), "truncated": int(rec.truncated_at is not None),
            "residual_positive_loops": len(positive_loops(sys_, J, rec.final)),
            "energy_monotone": int(rec.energy_monotone), "flips": rec.n_flips,
            "energy_final": rec.energy_final}


def _terminal_reduce(p, rows):
    q = [r for r in rows if r["quiet"]]
    resid = sum(r["residual_positive_loops"] for r in q)
    mono = sum(r["energy_monotone"] for r in rows)
    need = math.ceil(0.9 * len(rows))
    ok = len(q) >= need and resid == 0 and mono == len(rows)
    return {"quiet_replicas": len(q), "quiet_needed": need, "residual_in_quiet": resid,
            "residual_all": sum(r["residual_positive_loops"] for r in rows),
            "energy_monotone": mono, "truncated": sum(r["truncated"] for r in rows)}, ok


experiment("loop-terminal-gsp",
           "weak limits of loop dynamics are ground state pairs (finite-window analogue)",
           "~30 s", side=8, max_length=8, c=10.0, horizon_factor=50.0, trailing=0.2, max_events=4000,
           replicas=50)((_terminal_unit, _terminal_reduce))


def loop_count_oracle(side: int = 9, max_length: int = 8) -> dict:
    win = _window(side, side)
    loops = enumerate_dual_loops(win, max_length)
    centre = win.vid(side // 2, side // 2)
    around = loops_enclosing(loops, centre)
    w = h = side - 1  # dual dimensions
    return {
        "plaquettes": sum(1 for lp in loops if lp.length == 4),
        "plaquettes_expected": (w - 1) * (h - 1),
        "length6_around_centre": sum(1 for lp in around if lp.length == 6),
        "upto8_around_centre": sum(1 for lp in around if lp.length <= 8),
        "perimeter8_shapes": sum(1 for s in polygon_shapes(8) if len(s) == 8),
        "types": len(loop_types(loops)),
    }


def _count_unit(p, i, seed):
    return loop_count_oracle(p["side"], p["max_length"])


def _count_reduce(p, rows):
    r = rows[0]
    ok = (r["plaquettes"] == r["plaquettes_expected"] and r["length6_around_centre"] == 4
          and r["upto8_around_centre"] == 27 and r["perimeter8_shapes"] == 7)
    return dict(r), ok


experiment("loop-count-oracle",
           "loop types, lengths and placements around a vertex",
           "<1 s", side=9, max_length=8, replicas=1)((_count_unit, _count_reduce))


def cross_lemma_instance(seed: int, box: int = 64, tries: int = 200) -> dict:
    """Random covering path of a sub-block and a (p, q, n, m) meeting the precondition."""
    rng = generator(seed, "choice")
    for attempt in range(100):
        s = int(rng.integers(6, 17))
        ox, oy = (int(v) for v in rng.integers(0, box - s, 2))
        pts = random_block_path(s, s, 5 * s * s, derive(seed, "paths", attempt), (ox, oy))
        path = LatticePath(pts, window=(0, 0, box - 1, box - 1))
        for _ in range(tries):
            p = pts[int(rng.integers(len(pts)))]
            q = pts[int(rng.integers(len(pts)))]
            n, m = (int(v) for v in rng.integers(1, 4, 2))
            try:
                res = check_cross_lemma(path, p, q, n, m)
            except (CrossUnavailable, PreconditionError):
                continue
            return {"holds": int(res.holds), "distance": res.distance, "bound": res.bound,
                    "block": s, "n": n, "m": m}
    raise RuntimeError("no instance met the precondition")


def _cross_unit(p, i, seed):
    return cross_lemma_instance(seed, p["box"])


def _cross_reduce(p, rows):
    bad = sum(1 - r["holds"] for r in rows)
    return {"instances": len(rows), "violations": bad,
            "mean_distance_over_bound": _mean([r["distance"] / max(r["bound"], 1) for r in rows])}, bad == 0


experiment("cross-lemma",
           "crossing crosses force intersecting snails",
           "~5 s", box=64, replicas=1000)((_cross_unit, _cross_reduce))


def _mt_unit(p, i, seed):
    f = sample_directed_forest(p["side"], p["side"], p["p"], seed)
    return {f"rhs_n{n}": mt_estimate(f, f"eq:{n}", p["margin"]).rhs for n in range(1, p["max_n"] + 1)}


def _mt_reduce(p, rows):
    col = mt_estimate(column_forest(32, 32), "le:3", 8)
    out = {"column_lhs": col.lhs, "column_rhs": col.rhs}
    ok = col.lhs == col.rhs == 3.0
    for n in range(1, p["max_n"] + 1):
        m = _mean([r[f"rhs_n{n}"] for r in rows])
        out[f"mean_rhs_n{n}"] = m
        ok &= abs(m - 1) <= 0.05
    return out, ok


experiment("mass-transport",
           "each vertex of a single-infinite forest has one expected descendant per distance",
           "~1 s", side=512, p=0.5, margin=8, max_n=5, replicas=10)((_mt_unit, _mt_reduce))


def _margin_unit(p, i, seed):
    sys_ = _loop_system(p["side"], p["max_length"], p["c"])
    g = sys_.window.graph
    J = sample_couplings(g, p["coupling"], seed)
    fmin = float(sys_.rates[sys_.rates > 0].min())
    T = p["horizon_factor"] / fmin
    rec = run_loop_dynamics(sys_, J, random_spins(g.n, seed), T, seed)
    base = rec.flip_sequence()
    edges = [e for e in sys_.edge_loops]
    edges.sort()
    rng = generator(seed, "choice", 1)
    picks = rng.choice(len(edges), size=min(p["edges"], len(edges)), replace=False)
    fails = crossed = slack = infinite = 0
    for k in picks:
        e = edges[int(k)]
        mg = perturbation_margin(rec, sys_, e)
        eps = mg.epsilon if math.isfinite(mg.epsilon) else 1.0
        infinite += not math.isfinite(mg.epsilon)
        for d in (eps / 2, -eps / 2):
            if replay_with_shift(sys_, J, rec, e, d).flip_sequence() != base:
                fails += 1
        if math.isfinite(mg.epsilon) and mg.sxsy != 0:
            if replay_with_shift(sys_, J, rec, e, crossing_shift(mg)).flip_sequence() != base:
                crossed += 1
            else:
                slack += 1
    return {"identical_replay_failures": fails, "crossing_changed": crossed,
            "crossing_slack": slack, "infinite_margins": infinite, "flips": rec.n_flips}


def _margin_reduce(p, rows):
    f = sum(r["identical_replay_failures"] for r in rows)
    return {"identical_replay_failures": f,
            "crossing_changed": sum(r["crossing_changed"] for r in rows),
            "crossing_slack": sum(r["crossing_slack"] for r in rows),
            "infinite_margins": sum(r["infinite_margins"] for r in rows)}, f == 0


experiment("perturbation-margin",
           "loop dynamics are locally constant in the couplings away from sign boundaries",
           "~4 s", side=6, max_length=8, c=10.0, coupling="gaussian:1.0", horizon_factor=50.0, edges=10,
           replicas=50)((_margin_unit, _margin_reduce))


def _sf_unit(p, i, seed):
    n = p["sizes"][i % len(p["sizes"])]
    prob, se = strongly_freezing_probability(complete_graph(n), p["d"], p["samples"], seed)
    return {"n": n, "p": prob, "stderr": se}


def _sf_reduce(p, rows):
    ok = True
    for a, b in zip(rows, rows[1:]):
        ok &= b["p"] >= a["p"] - 2 * math.hypot(a["stderr"], b["stderr"])
    return {f"p_n{r['n']}": r["p"] for r in rows}, ok


experiment("strongly-freezing",
           "probability that a complete slice starts strongly frozen grows with its size",
           "<1 s", sizes=(10, 20, 40, 80), d=2, samples=10_000, replicas=4)((_sf_unit, _sf_reduce))


def _en_unit(p, i, seed):
    n = p["sizes"][i // p["seeds"]]
    side = 2 * n + 5
    f = sample_directed_forest(side, side, p["p"], seed)
    return {"n": n, "e_n": count_boundary_path_edges(f, n)}


def _en_reduce(p, rows):
    table = []
    for n in p["sizes"]:
        v = np.array([r["e_n"] / n for r in rows if r["n"] == n])
        table.append((n, float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0, len(v)))
    ok = all(b[1] > a[1] for a, b in zip(table, table[1:]))
    return {"trend": [list(t) for t in table]}, ok


experiment("en-trend",
           "boundary-path edges of a single-infinite forest grow faster than the box side",
           "~1 s", sizes=(16, 32, 64, 128, 256), seeds=20, p=0.5, replicas=100)((_en_unit, _en_reduce))


def _treeflip_unit(p, i, seed):
    t = build_regular_tree(p["degree"], p["depth"])
    J = sample_couplings(t, p["coupling"], seed)
    res = construct_tree_flip_gsp(t, J, p["h"], p["K"])
    return {"found": int(res is not None), "local_check": int(res is not None and res.check.passed)}


def _treeflip_reduce(p, rows):
    found = [r for r in rows if r["found"]]
    good = sum(r["local_check"] for r in found)
    return {"found": len(found), "passed": good}, good == len(found)


experiment("tree-flip-gsp",
           "trees carry ground states with an unsatisfied light edge",
           "<1 s", degree=3, depth=6, coupling="gaussian:1.0", h=0.5, K=4, replicas=10)(
    (_treeflip_unit, _treeflip_reduce))


MAJORITY_CAP = 50


def _majority_unit(p, i, seed):
    t = _tree_cached(p["degree"], p["depth"])
    red = majority_recolor(t, sample_coloring(t, p["p"], seed))
    sizes = cluster_sizes(t, ~red)
    return {"largest_nonred": sizes[0] if sizes else 0, "red_density": float(red.mean())}


@lru_cache(maxsize=None)
def _tree_cached(degree, depth):
    return build_regular_tree(degree, depth)


def _majority_reduce(p, rows):
    worst = max(r["largest_nonred"] for r in rows)
    return {"largest_nonred": worst, "mean_red_density": _mean([r["red_density"] for r in rows])}, \
        worst <= MAJORITY_CAP


experiment("majority-clusters",
           "strongly biased majority recoloring leaves only small non-red clusters",
           "~2 s", degree=4, depth=10, p=0.99, replicas=100)((_majority_unit, _majority_reduce))


# running

def resolve_params(exp: Experiment, cfg: ExperimentConfig | None) -> dict:
    p = dict(exp.defaults)
    if cfg is None:
        return p
    over = {"replicas": cfg.replicas, "horizon": cfg.horizon, "c": cfg.c, "max_length": cfg.max_length,
            "coupling": cfg.coupling or None}
    for k, v in over.items():
        if v is not None:
            if k not in p:
                raise ValueError(f"experiment {exp.name!r} has no parameter {k!r}")
            p[k] = v
    if cfg.graph:
        raise ValueError("graph recipes are fixed per experiment")
    if cfg.boundary and cfg.boundary != "free":
        raise ValueError("only free windows are supported by the registered experiments")
    return p


def _call(unit, params, master, i):
    return unit(params, i, replica_seed(master, i))


@dataclass
class Result:
    name: str
    passed: bool
    summary: dict
    rows: list[dict] = field(repr=False)
    params: dict = field(default_factory=dict)
    seed: int = 0

    def summary_json(self) -> str:
        exp = REGISTRY[self.name]
        return formats.dumps({"experiment": self.name, "reference": exp.reference, "passed": self.passed,
                              "seed": self.seed, "params": self.params, "summary": self.summary})

    def runs_csv(self) -> str:
        keys = sorted({k for r in self.rows for k in r})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replica"] + keys)
        for i, r in enumerate(self.rows):
            w.writerow([i] + [formats.fmt_float(r[k]) if isinstance(r.get(k), float) else r.get(k, "")
                              for k in keys])
        return buf.getvalue()

    def write(self, out: str | Path) -> None:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "summary.json").write_text(self.summary_json(), encoding="utf-8")
        (d / "runs.csv").write_text(self.runs_csv(), encoding="utf-8")


def run_experiment(cfg: ExperimentConfig | str, jobs: int = 1, **params: Any) -> Result:
    if isinstance(cfg, str):
        cfg = ExperimentConfig(name=cfg)
    if cfg.name not in REGISTRY:
        raise KeyError(f"unknown experiment {cfg.name!r}")
    exp = REGISTRY[cfg.name]
    p = resolve_params(exp, cfg)
    p.update(params)
    n = int(p["replicas"])
    if exp.name == "en-trend":
        n = len(p["sizes"]) * p["seeds"]
        p["replicas"] = n
    call = partial(_call, exp.unit, p, cfg.seed)
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(call, range(n), chunksize=max(1, n // (4 * jobs))))
    else:
        rows = [call(i) for i in range(n)]
    summary, ok = exp.reduce(p, rows)
    res = Result(exp.name, bool(ok), summary, rows, {k: (list(v) if isinstance(v, tuple) else v) for k, v in p.items()},
                 cfg.seed)
    if cfg.out:
        res.write(cfg.out)
    return res


def list_experiments() -> list[tuple[str, str, str]]:
    return [(e.name, e.reference, e.budget) for e in REGISTRY.values()]
