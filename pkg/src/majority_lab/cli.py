"""Command-line entry point: ``majority-lab <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import analysis, dynamics, experiments, generators, spectral
from .errors import MajorityLabError, PreconditionError, UsageError
from .graph import NodeSet, load_edgelist, save_edgelist, validate


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(obj):
    def default(o):
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, (set, frozenset, tuple)):
            return list(o)
        raise TypeError(type(o).__name__)

    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return None
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return o

    print(json.dumps(clean(obj), default=default))


def _parse_set(text: str, n: int) -> NodeSet:
    try:
        ids = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"bad node list {text!r}") from None
    return NodeSet.from_members(n, ids)


# ------------------------------------------------------------------ commands

def cmd_gen(args):
    if args.kind == "named":
        if not args.name:
            raise UsageError("--name is required for --kind named")
        name, params = generators.parse_named(args.name)
        if not params and args.n is not None:
            params = (args.n,)
        spec = generators.GenSpec(kind="named", name=name, params=params)
    else:
        spec = generators.GenSpec(kind=args.kind, n=args.n, p=args.p, delta=args.delta,
                                  lps_p=args.lps_p, lps_q=args.lps_q, seed=args.seed)
    g = spec.build(np.random.default_rng(args.seed))
    save_edgelist(g, args.out)
    _emit({"kind": args.kind, "n": g.n, "m": g.m, "regular_degree": g.regular_degree(), "out": args.out})


def cmd_evolve(args):
    g = load_edgelist(args.graph)
    if args.init_file:
        c0 = dynamics.Configuration.read(args.init_file)
        if c0.n != g.n:
            raise UsageError(f"configuration has {c0.n} nodes, graph has {g.n}")
    else:
        if args.pb is None:
            raise UsageError("give either --pb with --seed, or --init-file")
        c0 = dynamics.random_configuration(g.n, args.pb, np.random.default_rng(args.seed))
    traj = dynamics.evolve(g, c0, cap=args.max_rounds)
    _emit(traj.to_dict(trace=args.trace))


def cmd_sweep(args):
    spec = experiments.read_config(args.config)
    results = experiments.sweep(spec)
    rec, summ = experiments.write_sweep(results, args.out)
    _emit({"records": str(rec), "summary": str(summ), "cells": len(results),
           "trials": sum(len(r.records) for r in results)})


def cmd_spectral(args):
    g = load_edgelist(args.graph)
    rep = spectral.lambda_second(g, tol=args.tol, max_iter=args.max_iter)
    _emit(rep.to_dict())


def _lambda_for(g, given):
    if given is not None:
        return given
    rep = spectral.lambda_second(g)
    return rep.lambda_upper


def cmd_mixing(args):
    g = load_edgelist(args.graph)
    lam = _lambda_for(g, args.lam)
    rep = spectral.mixing_audit(g, lam, args.pairs, np.random.default_rng(args.seed), strict=False)
    _emit(rep.to_dict())
    if not rep.passed:
        return 2
    return 0


def cmd_immunity(args):
    g = load_edgelist(args.graph)
    lam = args.lam
    if lam is None and g.regular_degree() and g.is_connected() and g.n > 2:
        lam = spectral.lambda_second(g).lambda_upper
    if args.exhaustive:
        rep = analysis.immunity_audit(g, args.beta, mode="exhaustive", lam=lam)
    else:
        rep = analysis.immunity_audit(g, args.beta, mode="sampled", budget=args.samples,
                                      rng=np.random.default_rng(args.seed), lam=lam)
    _emit(rep.to_dict())


def cmd_dynamo(args):
    g = load_edgelist(args.graph)
    if args.min_exhaustive:
        size, witness = dynamics.min_dynamo_exhaustive(g)
        _emit({"min_dynamo_size": size, "witness": witness.members().tolist()})
    else:
        d = _parse_set(args.set, g.n)
        _emit({"set": d.members().tolist(), "is_dynamo": dynamics.is_dynamo(g, d)})


def cmd_bounds(args):
    g = load_edgelist(args.graph)
    lam = _lambda_for(g, args.lam)
    c0 = dynamics.random_configuration(g.n, args.pb, np.random.default_rng(args.seed))
    traj = dynamics.evolve(g, c0)
    rep = analysis.bound_trajectory(g, lam, traj)
    out = rep.to_dict()
    out.pop("rounds")
    out["trajectory"] = traj.to_dict(trace=True)
    try:
        out["theorem2"] = {"applicable": True, "holds": analysis.check_theorem2(g, lam, traj)}
    except PreconditionError as exc:
        out["theorem2"] = {"applicable": False, "reason": exc.reason, "message": str(exc)}
    _emit(out)


def cmd_validate(args):
    g = load_edgelist(args.graph)
    problems = validate(g)
    _emit({"n": g.n, "m": g.m, "valid": not problems, "problems": problems})
    return 0 if not problems else 2


def cmd_cycles(args):
    g = load_edgelist(args.graph)
    nodes = analysis.short_cycle_nodes(g)
    _emit({"n": g.n, "flagged_nodes": len(nodes), "nodes": nodes})


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="majority-lab", description="Majority dynamics on graphs: generators, spectra, audits.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen", help="generate a graph and write it as an edge list")
    s.add_argument("--kind", required=True, choices=["gnp", "regular", "lps", "named"])
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--delta", type=int)
    s.add_argument("--lps-p", type=int)
    s.add_argument("--lps-q", type=int)
    s.add_argument("--name", help='e.g. petersen, "cycle(5)", "complete_bipartite(4,4)"')
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("evolve", help="run the majority model to its period and report the trajectory")
    s.add_argument("--graph", required=True)
    s.add_argument("--pb", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--init-file")
    s.add_argument("--max-rounds", type=int)
    s.add_argument("--trace", action="store_true", help="include per-round blue counts")
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("sweep", help="Monte Carlo sweep from a key=value config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="output prefix; writes PREFIX.csv and PREFIX_summary.csv")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("spectral", help="second-largest absolute eigenvalue of a regular graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--tol", type=float, default=spectral.DEFAULT_TOL)
    s.add_argument("--max-iter", type=int, default=spectral.DEFAULT_MAX_ITER)
    s.set_defaults(func=cmd_spectral)

    s = sub.add_parser("mixing", help="sampled expander mixing lemma audit")
    s.add_argument("--graph", required=True)
    s.add_argument("--pairs", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lambda", dest="lam", type=float)
    s.set_defaults(func=cmd_mixing)

    s = sub.add_parser("immunity", help="worst control ratio over small sets")
    s.add_argument("--graph", required=True)
    s.add_argument("--beta", type=float, required=True)
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lambda", dest="lam", type=float)
    s.set_defaults(func=cmd_immunity)

    s = sub.add_parser("dynamo", help="dynamo test or exhaustive minimum dynamo")
    s.add_argument("--graph", required=True)
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--min-exhaustive", action="store_true")
    mode.add_argument("--set")
    s.set_defaults(func=cmd_dynamo)

    s = sub.add_parser("bounds", help="one trajectory checked against the expander round bounds")
    s.add_argument("--graph", required=True)
    s.add_argument("--pb", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lambda", dest="lam", type=float)
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("validate", help="report graph invariant violations")
    s.add_argument("--graph", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("cycles", help="nodes on two or more distinct 3- or 4-cycles")
    s.add_argument("--graph", required=True)
    s.set_defaults(func=cmd_cycles)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except MajorityLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
