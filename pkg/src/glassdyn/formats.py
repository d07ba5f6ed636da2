"""Text, CSV and JSON serialization.

Floats are written with ``repr`` so every value round-trips bit-exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

from .disorder import Coupling, Descriptor
from .forests import ForestView
from .graphs import Graph, PlanarWindow, build_square_window
from .loops import DualLoop, loop_from_points


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


# graphs and windows

def dump_graph(g: Graph | PlanarWindow) -> str:
    lines = []
    if isinstance(g, PlanarWindow):
        lines += ["kind window", f"dims {g.width} {g.height}", f"boundary {g.boundary}"]
        if g.xi is not None:
            lines.append("xi " + " ".join(str(int(s)) for s in g.xi))
        graph = g.graph
    else:
        lines.append(f"kind {g.kind}")
        graph = g
    lines.append(f"n {graph.n}")
    lines.append(f"edges {graph.m}")
    lines += [f"{u} {v}" for u, v in graph.edges]
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> Graph | PlanarWindow:
    head: dict[str, list[str]] = {}
    edges = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    it = iter(lines)
    for ln in it:
        key, *rest = ln.split()
        head[key] = rest
        if key == "edges":
            break
    for ln in it:
        u, v = ln.split()
        edges.append((int(u), int(v)))
    if "edges" not in head or int(head["edges"][0]) != len(edges):
        raise ValueError("edge count does not match header")
    n = int(head["n"][0])
    kind = head["kind"][0]
    if kind == "window":
        w, h = (int(x) for x in head["dims"])
        xi = [int(s) for s in head["xi"]] if "xi" in head else None
        win = build_square_window(w, h, head["boundary"][0], xi)
        if win.graph.n != n or win.graph.edges != sorted(edges):
            raise ValueError("window edges do not match its dimensions")
        return win
    return Graph(n, edges, kind=kind)


def dump_loops(loops: Iterable[DualLoop]) -> str:
    return "".join(" ".join(str(f) for f in lp.faces) + "\n" for lp in loops)


def load_loops(text: str, window: PlanarWindow) -> list[DualLoop]:
    out = []
    for ln in text.splitlines():
        if ln.strip():
            faces = [int(f) for f in ln.split()]
            out.append(loop_from_points(window, [window.face_coord(f) for f in faces]))
    return out


# couplings

def dump_coupling(c: Coupling) -> str:
    lines = [f"# descriptor {c.descriptor}", f"# seed {c.seed}"]
    lines += [f"{u} {v} {fmt_float(j)}" for (u, v), j in zip(c.graph.edges, c.values)]
    return "\n".join(lines) + "\n"


def load_coupling(text: str, graph: Graph) -> Coupling:
    desc, seed = None, 0
    vals: dict[tuple[int, int], float] = {}
    for ln in text.splitlines():
        if ln.startswith("# descriptor "):
            desc = Descriptor.parse(ln.split(maxsplit=2)[2])
        elif ln.startswith("# seed "):
            seed = int(ln.split()[2])
        elif ln.strip() and not ln.startswith("#"):
            u, v, j = ln.split()
            a, b = int(u), int(v)
            vals[(min(a, b), max(a, b))] = float(j)
    if set(vals) != set(graph.edges):
        raise ValueError("coupling edges do not match the graph")
    arr = np.array([vals[e] for e in graph.edges])
    return Coupling(graph, arr, desc or Descriptor("custom"), seed)


# dynamics records

def _csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_float(x) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def run_counters_csv(rec) -> str:
    rows = (
        (v, int(rec.flips[v]), int(rec.energy_reducing[v]), float(rec.last_flip[v]), int(rec.final[v]))
        for v in range(len(rec.final))
    )
    return _csv(["vertex", "flips", "energy_reducing_flips", "last_flip_time", "final_spin"], rows)


def run_events_csv(rec) -> str:
    return _csv(["time", "vertex", "delta_h"],
                ((float(t), int(v), float(d)) for t, v, d in zip(rec.events_t, rec.events_v, rec.events_dh)))


def run_summary(rec, classification: str | None = None) -> dict:
    return {
        "classification": classification,
        "energy_initial": rec.energy0,
        "energy_final": rec.energy_final,
        "seed": rec.seed,
        "horizon": rec.horizon,
        "events": rec.n_events,
    }


def loop_events_csv(rec) -> str:
    return _csv(["time", "loop_canonical_id", "H_value", "action"],
                ((float(t), int(i), float(h), a) for t, i, h, a in
                 zip(rec.events_t, rec.events_loop, rec.events_h, rec.events_action)))


def type_energy_csv(series: dict[str, list[tuple[float, float]]]) -> str:
    rows = ((name, float(t), float(e)) for name, pts in series.items() for t, e in pts)
    return _csv(["type", "time", "cumulative_energy_change"], rows)


def loop_summary(rec, residual: int) -> dict:
    return {
        "terminal_local_ground_state": residual == 0 and rec.truncated_at is None,
        "loop_scan_residual": residual,
        "energy_initial": rec.energy0,
        "energy_final": rec.energy_final,
        "energy_monotone": rec.energy_monotone,
        "seed": rec.seed,
        "horizon": rec.horizon,
        "truncated_at": rec.truncated_at,
    }


# ground states

def spin_bits(sigma: Sequence[int]) -> str:
    """'1' for +1 and '0' for -1, vertex 0 first."""
    return "".join("1" if s > 0 else "0" for s in sigma)


def bits_spins(bits: str) -> np.ndarray:
    return np.array([1 if b == "1" else -1 for b in bits], dtype=np.int8)


def report_to_json(rep) -> str:
    doc = {
        "energy": rep.energy,
        "notion": rep.notion,
        "degenerate": rep.degenerate,
        "minimizers": [spin_bits(s) for s in rep.minimizers],
        "unsatisfied": [list(map(int, u)) for u in rep.unsatisfied],
        "flags": rep.flags,
    }
    return dumps(doc)


def report_from_json(text: str):
    from .groundstate import GroundStateReport

    d = json.loads(text)
    return GroundStateReport(d["energy"], [bits_spins(b) for b in d["minimizers"]], d["degenerate"],
                             d["unsatisfied"], d["notion"], d["flags"])


def dumps(doc: Any) -> str:
    """Deterministic JSON: sorted keys, fixed separators, non-finite floats as strings."""
    def clean(x):
        if isinstance(x, dict):
            return {str(k): clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        if isinstance(x, np.generic):
            x = x.item()
        if isinstance(x, float) and not math.isfinite(x):
            return fmt_float(x)
        return x

    return json.dumps(clean(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# forests and estimators

def dump_forest(f: ForestView) -> str:
    lines = [f"# dims {f.width} {f.height}"]
    lines += [f"{v} {int(p)}" for v, p in enumerate(f.parent)]
    return "\n".join(lines) + "\n"


def load_forest(text: str) -> ForestView:
    lines = text.splitlines()
    w, h = (int(x) for x in lines[0].split()[2:4])
    par = np.full(w * h, -1, dtype=np.int64)
    for ln in lines[1:]:
        if ln.strip():
            v, p = ln.split()
            par[int(v)] = int(p)
    return ForestView(w, h, par)


def estimator_csv(rows: Iterable[tuple[int, float, float, int]]) -> str:
    return _csv(["n", "value", "stderr", "seeds"], ((int(n), float(v), float(s), int(k)) for n, v, s, k in rows))
