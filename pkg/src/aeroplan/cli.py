"""Command-line front end.

Subcommands: scenario-gen, plan, plan-multi, brute, replay, sweep, table-gen.
JSON artifacts go to stdout unless --out is given; sweep tables default to a
CSV file.  Exit codes: 0 success, 2 invalid input, 3 infeasible task (with a
machine-readable JSON error on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .linkweight import build_environment
from .multiflow import plan_multi
from .planner import brute_force, plan_single
from .radiomap import FGammaTable
from .scenario import Scenario, scenario_from_json, scenario_to_json

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3


def _fail(code, message, **extra):
    doc = {"error": message}
    doc.update(extra)
    print(json.dumps(doc), file=sys.stderr)
    return code


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text)


def _load_scenario(path) -> Scenario:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    return scenario_from_json(p.read_text())


def _environment(scenario, args):
    table = None
    if args.bound == "approx2":
        table = FGammaTable.load_or_build()
    return build_environment(scenario, bound_mode=args.bound, table=table)


def _add_common(p):
    p.add_argument("--bound", choices=("lower", "approx1", "approx2", "mc"),
                   default="approx2", help="capacity expression used in planning")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--tol", type=float, default=1e-4,
                   help="relative leakage bisection tolerance")


def build_parser():
    ap = argparse.ArgumentParser(prog="aeroplan")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("scenario-gen", help="generate a seeded scenario JSON")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--nodes", type=int, default=7, help="aerial nodes incl. endpoints")
    g.add_argument("--neighbors", type=int, default=3)
    g.add_argument("--horizon", type=float, default=10.0, help="deadline T, seconds")
    g.add_argument("--size-mbit", type=float, default=50.0, help="payload per commodity")
    g.add_argument("--flows", type=int, default=1, help="number of commodities Z")
    g.add_argument("--segments", action="store_true",
                   help="split one payload across Z flows on one pair")
    g.add_argument("--dt", type=float, default=0.05)
    g.add_argument("--out", default=None)

    for name in ("plan", "brute", "replay"):
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True)
        _add_common(p)
        if name == "plan":
            p.add_argument("--dump-graph", default=None,
                           help="write the final space-time graph JSON here")
        if name == "replay":
            p.add_argument("--realizations", type=int, default=200)
            p.add_argument("--seed", type=int, default=0)

    pm = sub.add_parser("plan-multi")
    pm.add_argument("--scenario", required=True)
    pm.add_argument("--slots", type=int, default=64)
    _add_common(pm)

    sw = sub.add_parser("sweep")
    sw.add_argument("--vary", choices=harness.SWEEP_KNOBS, required=True)
    sw.add_argument("--values", required=True, help="comma-separated knob values")
    sw.add_argument("--seeds", type=int, required=True)
    sw.add_argument("--methods", default="proposed,spacetime,aggregate")
    sw.add_argument("--seed", type=int, default=0, help="base seed")
    sw.add_argument("--out", default="sweep.csv")
    sw.add_argument("--bound", choices=("lower", "approx1", "approx2", "mc"),
                    default="approx2")

    tg = sub.add_parser("table-gen", help="build or refresh the capacity table cache")
    tg.add_argument("--cache-dir", default=None)
    return ap


def run(argv) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code not in (0, None) else EXIT_OK

    try:
        if args.command == "scenario-gen":
            sc = harness.generate_scenario(
                args.seed, M=args.nodes, N=args.neighbors, T=args.horizon,
                S_bits=args.size_mbit * 1e6, Z=args.flows,
                commodity_mode="segments" if args.segments else "pairs",
                dt=args.dt,
            )
            _emit(scenario_to_json(sc), args.out)
            return EXIT_OK

        if args.command == "table-gen":
            FGammaTable.load_or_build(cache_dir=args.cache_dir)
            print("capacity table ready", file=sys.stderr)
            return EXIT_OK

        if args.command == "sweep":
            values = [float(v) for v in args.values.split(",") if v.strip() != ""]
            spec = harness.SweepSpec(
                vary=args.vary, values=values, n_seeds=args.seeds,
                methods=[m.strip() for m in args.methods.split(",")],
            )
            csv = harness.sweep(spec, seed0=args.seed, bound_mode=args.bound)
            _emit(csv, args.out)
            return EXIT_OK

        scenario = _load_scenario(args.scenario)
        env = _environment(scenario, args)

        if args.command == "plan":
            com = scenario.commodities[0]
            plan = plan_single(env, com.src, com.dst, com.size_bits)
            if args.dump_graph:
                from .stgraph import build_graph
                graph = build_graph(env, plan.boundaries, com.size_bits)
                Path(args.dump_graph).write_text(graph.to_json())
            _emit(plan.to_json(), args.out)
            return EXIT_OK if plan.feasible else _fail(
                EXIT_INFEASIBLE, "infeasible task", theta="inf")

        if args.command == "brute":
            com = scenario.commodities[0]
            plan = brute_force(env, com.src, com.dst, com.size_bits)
            _emit(plan.to_json(), args.out)
            return EXIT_OK if plan.feasible else _fail(
                EXIT_INFEASIBLE, "infeasible task", theta="inf")

        if args.command == "plan-multi":
            mp = plan_multi(env, scenario.commodities, n_slots=args.slots)
            _emit(mp.to_json(), args.out)
            return EXIT_OK if mp.feasible else _fail(
                EXIT_INFEASIBLE, "infeasible task", diagnostics=mp.diagnostics)

        if args.command == "replay":
            com = scenario.commodities[0]
            plan = plan_single(env, com.src, com.dst, com.size_bits)
            if not plan.feasible:
                return _fail(EXIT_INFEASIBLE, "infeasible task")
            report = harness.replay(env, plan, seed=args.seed,
                                    n_realizations=args.realizations)
            _emit(json.dumps(report.summary(), indent=2), args.out)
            return EXIT_OK
    except FileNotFoundError as e:
        return _fail(EXIT_INVALID, str(e))
    except ValueError as e:
        return _fail(EXIT_INVALID, str(e))
    return EXIT_INVALID


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
