"""Command-line entry point."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import formats
from .config import ConfigError, ExperimentConfig, load_config
from .disorder import Descriptor, sample_couplings
from .experiments import REGISTRY, list_experiments, run_experiment
from .graphs import PlanarWindow, build_regular_tree, build_square_window, from_recipe


def _emit(text: str, out: str | None, name: str) -> None:
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / name).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_list(args) -> int:
    rows = list_experiments()
    w = max(len(r[0]) for r in rows)
    for name, ref, budget in rows:
        print(f"{name:<{w}}  {budget:>6}  {ref}")
    return 0


def cmd_run(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if args.name and args.name != cfg.name:
            raise ConfigError(f"config names {cfg.name!r} but {args.name!r} was requested")
    elif args.name:
        cfg = ExperimentConfig(name=args.name)
    else:
        raise ConfigError("give an experiment name or --config")
    if cfg.name not in REGISTRY:
        print(f"unknown experiment {cfg.name!r}; see `glassdyn list`", file=sys.stderr)
        return 2
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out:
        overrides["out"] = args.out
    if args.replicas is not None:
        overrides["replicas"] = args.replicas
    if overrides:
        cfg = ExperimentConfig(**{**cfg.as_dict(), **overrides})
    res = run_experiment(cfg, jobs=args.jobs)
    sys.stdout.write(res.summary_json())
    print(f"{res.name}: {'PASS' if res.passed else 'FAIL'}", file=sys.stderr)
    return 0 if res.passed else 1


def cmd_graph(args) -> int:
    _emit(formats.dump_graph(from_recipe(args.recipe)), args.out, "graph.txt")
    return 0


def _graph_and_coupling(args):
    g = from_recipe(args.graph)
    graph = g.graph if isinstance(g, PlanarWindow) else g
    return g, graph, sample_couplings(graph, Descriptor.parse(args.coupling), args.seed or 0)


def cmd_gsp(args) -> int:
    from .groundstate import (
        check_torus_unique_gsp,
        construct_tree_flip_gsp,
        enumerate_ground_states,
        verify_local_ground_state,
    )

    if args.gsp_cmd == "enumerate":
        _, graph, J = _graph_and_coupling(args)
        _emit(formats.report_to_json(enumerate_ground_states(graph, J)), args.out, "report.json")
        return 0
    if args.gsp_cmd == "verify":
        _, graph, J = _graph_and_coupling(args)
        s = formats.bits_spins(args.spins)
        if len(s) != graph.n:
            raise ValueError(f"spin string has {len(s)} entries, graph has {graph.n} vertices")
        chk = verify_local_ground_state(s, J, graph, args.K)
        doc = {"passed": chk.passed, "K": chk.K, "subsets_checked": chk.subsets_checked,
               "witness": None if chk.witness is None else list(map(int, chk.witness)), "notion": chk.notion}
        _emit(formats.dumps(doc), args.out, "verify.json")
        return 0 if chk.passed else 1
    if args.gsp_cmd == "tree-flip":
        tree = build_regular_tree(args.degree, args.depth)
        J = sample_couplings(tree, Descriptor.parse(args.coupling), args.seed or 0)
        res = construct_tree_flip_gsp(tree, J, args.h, args.K)
        doc = {"found": res is not None}
        if res is not None:
            doc.update(config=formats.spin_bits(res.config), edge=list(tree.edges[res.edge]),
                       local_check=res.check.passed)
        _emit(formats.dumps(doc), args.out, "tree_flip.json")
        return 0 if res is None or res.check.passed else 1
    if args.gsp_cmd == "torus-check":
        from .disorder import constant_coupling

        w = build_square_window(args.side, args.side, "periodic")
        rep = check_torus_unique_gsp(w, constant_coupling(w.graph))
        _emit(formats.report_to_json(rep), args.out, "report.json")
        return 0 if rep.flags["monochromatic_pair_only"] else 1
    raise AssertionError(args.gsp_cmd)


def cmd_loops(args) -> int:
    from .loops import canonical_form, enumerate_dual_loops, loop_types

    w = build_square_window(args.width, args.height or args.width, "free")
    loops = enumerate_dual_loops(w, args.max_length)
    if args.types:
        lines = ["length,span,area,orientations,count"]
        counts: dict = {}
        for lp in loops:
            k = canonical_form(lp.points)
            counts[k] = counts.get(k, 0) + 1
        for key, t in sorted(loop_types(loops).items(), key=lambda kv: (kv[1].length, kv[1].area, kv[0])):
            lines.append(f"{t.length},{t.span},{t.area},{t.orientations},{counts[key]}")
        _emit("\n".join(lines) + "\n", args.out, "types.csv")
    else:
        _emit(formats.dump_loops(loops), args.out, "loops.txt")
    return 0


def cmd_geometry(args) -> int:
    from .forests import en_trend, sample_directed_forest
    from .geometry import square_spiral

    if args.geo_cmd == "spiral":
        _emit("".join(f"{x} {y}\n" for x, y in square_spiral(args.turns)), args.out, "path.txt")
    elif args.geo_cmd == "forest":
        f = sample_directed_forest(args.size, args.size, args.p, args.seed or 0)
        _emit(formats.dump_forest(f), args.out, "forest.txt")
    elif args.geo_cmd == "en":
        rows = en_trend(args.sizes, args.seeds, args.p, args.seed or 0)
        _emit(formats.estimator_csv(rows), args.out, "en.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glassdyn", description="Zero-temperature spin dynamics experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--out", default=None, help="output directory")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("list", help="list registered experiments")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("run", parents=[common], help="run a named experiment")
    p.add_argument("name", nargs="?")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--replicas", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("graph", parents=[common], help="build and print a graph")
    p.add_argument("recipe", help="e.g. window:5x4:free, tree:4:2, cylinder:K4:0:10")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("gsp", help="ground-state tools")
    gs = p.add_subparsers(dest="gsp_cmd", required=True)
    for name in ("enumerate", "verify"):
        q = gs.add_parser(name, parents=[common])
        q.add_argument("--graph", required=True)
        q.add_argument("--coupling", default="gaussian:1.0")
        if name == "verify":
            q.add_argument("--spins", required=True, help="bit string, 1 for +1")
            q.add_argument("--K", type=int, default=3)
        q.set_defaults(func=cmd_gsp)
    q = gs.add_parser("tree-flip", parents=[common])
    q.add_argument("--degree", type=int, default=3)
    q.add_argument("--depth", type=int, default=6)
    q.add_argument("--coupling", default="gaussian:1.0")
    q.add_argument("--h", type=float, default=0.5)
    q.add_argument("--K", type=int, default=4)
    q.set_defaults(func=cmd_gsp)
    q = gs.add_parser("torus-check", parents=[common])
    q.add_argument("--side", type=int, default=4)
    q.set_defaults(func=cmd_gsp)

    p = sub.add_parser("loops", parents=[common], help="enumerate dual loops of a free window")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--max-length", type=int, default=8)
    p.add_argument("--types", action="store_true", help="print the type table instead")
    p.set_defaults(func=cmd_loops)

    p = sub.add_parser("geometry", help="paths and forests")
    geo = p.add_subparsers(dest="geo_cmd", required=True)
    q = geo.add_parser("spiral", parents=[common])
    q.add_argument("--turns", type=int, default=3)
    q.set_defaults(func=cmd_geometry)
    q = geo.add_parser("forest", parents=[common])
    q.add_argument("--size", type=int, default=16)
    q.add_argument("--p", type=float, default=0.5)
    q.set_defaults(func=cmd_geometry)
    q = geo.add_parser("en", parents=[common])
    q.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    q.add_argument("--seeds", type=int, default=5)
    q.add_argument("--p", type=float, default=0.5)
    q.set_defaults(func=cmd_geometry)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
