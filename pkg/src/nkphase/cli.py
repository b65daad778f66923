"""Command-line interface: ``nkphase <command> ...``.

Commands: generate, reduce, analyze, solve, module, sweep, mc-check.
Errors are reported on stderr with exit status 2.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cnf import DimacsError, nk_to_cnf, read_dimacs, save_dimacs
from .core import NKInstance
from .generate import GenParams, InvalidParameters, generate
from .lab import (
    SweepGrid, TrialOptions, collision_factor, mc_check_all_zero, mc_check_conflict,
    mc_check_module_prob, parse_values, report, sweep,
)
from .solver import DEFAULT_BUDGET, dpll
from .structure import (
    DEFAULT_CAP, CapacityExceeded, build_connection_graph, components, decompose_solve,
    find_all_zero_function, find_conflicting_pair,
)
from .twosat import build_t3_module, extract_two_sat, solve_two_sat


def _model(name: str) -> str:
    name = name.replace("-", "_")
    if name not in ("uniform", "fixed_ratio"):
        raise argparse.ArgumentTypeError("model must be uniform or fixed-ratio")
    return name


def _emit(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    if args.model == "uniform":
        if args.p is None:
            raise InvalidParameters("--p is required for the uniform model")
        params = GenParams.uniform(args.n, args.k, args.p, args.seed)
    else:
        if args.z is None:
            raise InvalidParameters("--z is required for the fixed-ratio model")
        params = GenParams.fixed_ratio(args.n, args.k, args.z, args.seed)
    inst = generate(params)
    if args.out:
        inst.save(args.out)
    else:
        sys.stdout.write(inst.to_json() + "\n")
    return 0


def cmd_reduce(args) -> int:
    cnf = nk_to_cnf(NKInstance.load(args.inp))
    if args.out:
        save_dimacs(cnf, args.out)
    else:
        from .cnf import write_dimacs
        write_dimacs(cnf, sys.stdout)
    return 0


def cmd_analyze(args) -> int:
    inst = NKInstance.load(args.inp)
    out: dict = {"n": inst.n, "k": inst.k}
    if args.report in ("components", "all"):
        comps, stats = components(build_connection_graph(inst), inst)
        out["components"] = {
            "count": stats.count,
            "M": stats.max_variables,
            "max_vertices": stats.max_vertices,
            "sizes": list(stats.variable_sizes),
        }
        try:
            sol = decompose_solve(inst, args.cap)
            out["decomposition"] = {"soluble": sol.soluble, "reason": sol.reason, "detail": list(sol.detail)}
        except CapacityExceeded as exc:
            out["decomposition"] = {"capacity_exceeded": {"component": exc.component, "size": exc.size,
                                                          "cap": exc.cap}}
    if args.report in ("conflicts", "all"):
        pair = find_conflicting_pair(inst)
        out["all_zero_function"] = find_all_zero_function(inst)
        out["conflicting_pair"] = list(pair) if pair else None
    if args.report in ("twosat", "all"):
        sub = extract_two_sat(inst)
        res = solve_two_sat(sub)
        out["twosat"] = {
            "clauses": len(sub.clauses),
            "empty_clause": sub.has_empty_clause,
            "satisfiable": res.satisfiable,
            "conflict_var": res.conflict_var,
        }
    _emit(out, args.out)
    return 0


def cmd_solve(args) -> int:
    res = dpll(read_dimacs(args.inp), budget=args.budget, preprocess=args.preprocess)
    if res.witness is not None:
        lits = [str(v + 1 if b else -(v + 1)) for v, b in enumerate(res.witness)]
        sys.stdout.write("s SATISFIABLE\nv " + " ".join(lits + ["0"]) + "\n")
    elif res.status.value == "UNSAT":
        sys.stdout.write("s UNSATISFIABLE\n")
    else:
        sys.stdout.write("s UNKNOWN\n")
    if args.stats:
        _emit({"status": res.status.value, **res.stats.to_dict()}, args.stats)
    return {"SAT": 10, "UNSAT": 20}.get(res.status.value, 0)


def cmd_module(args) -> int:
    mod = build_t3_module(args.p)
    if args.out:
        save_dimacs(mod.cnf, args.out)
    else:
        from .cnf import write_dimacs
        write_dimacs(mod.cnf, sys.stdout)
    return 0


def cmd_sweep(args) -> int:
    grid = SweepGrid(
        tuple(int(x) for x in args.n.split(",")),
        tuple(parse_values(args.z if args.z is not None else args.p)),
        args.trials, args.seed, args.k, "uniform" if args.p is not None else "fixed_ratio",
    )
    options = TrialOptions(fast=args.fast, budget=args.budget)

    def progress(done, total):
        if args.verbose:
            print(f"\r{done}/{total}", end="", file=sys.stderr, flush=True)

    _, summary = sweep(grid, options, args.out, args.workers, progress)
    if args.verbose:
        print(file=sys.stderr)
    for path in report(summary, args.out, grid, options, svg=args.svg):
        print(path)
    return 0


def cmd_mc_check(args) -> int:
    if args.which == "all-zero":
        reports = [mc_check_all_zero(args.p, args.n, args.k, args.samples, args.seed)]
    elif args.which == "conflict":
        reports = [mc_check_conflict(args.samples, args.seed), mc_check_conflict(args.samples, args.seed, 0)]
    else:
        alphas = [args.alpha] if args.alpha is not None else [0.0, 0.5, 1.0]
        reports = [mc_check_module_prob(a, args.samples, args.seed) for a in alphas]
        col, pairs = collision_factor(args.n, min(args.samples, 100_000), args.seed)
        reports.append(col)
    _emit([r.to_dict() for r in reports])
    return 0 if all(r.within() for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nkphase", description="NK landscape solubility toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a random NK instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--model", type=_model, default="fixed_ratio", help="uniform or fixed-ratio")
    g.add_argument("--p", type=float, help="zero probability (uniform model)")
    g.add_argument("--z", type=float, help="zero rows per table (fixed-ratio model)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output JSON path (default: stdout)")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("reduce", help="convert an instance to DIMACS CNF")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    a = sub.add_parser("analyze", help="structural report as JSON")
    a.add_argument("--in", dest="inp", required=True)
    a.add_argument("--report", choices=["components", "conflicts", "twosat", "all"], default="all")
    a.add_argument("--cap", type=int, default=DEFAULT_CAP, help="component variable cap")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("solve", help="DPLL on a DIMACS file (exit 10 SAT, 20 UNSAT, 0 budget)")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="decision limit")
    s.add_argument("--preprocess", choices=["full", "basic"], default="full")
    s.add_argument("--stats", help="write solver statistics to this JSON file")
    s.set_defaults(func=cmd_solve)

    m = sub.add_parser("module", help="write a t-3-module with t = 3p + 2")
    m.add_argument("--p", type=int, required=True)
    m.add_argument("--out")
    m.set_defaults(func=cmd_module)

    w = sub.add_parser("sweep", help="run a seeded (n, z) grid and write summary.csv")
    w.add_argument("--k", type=int, default=2)
    w.add_argument("--n", required=True, help="comma-separated, e.g. 512,1024")
    grp = w.add_mutually_exclusive_group(required=True)
    grp.add_argument("--z", help="lo:hi:step or comma list (fixed-ratio model)")
    grp.add_argument("--p", help="lo:hi:step or comma list (uniform model)")
    w.add_argument("--trials", type=int, default=100)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    w.add_argument("--fast", action="store_true", help="skip DPLL when a detector already decides")
    w.add_argument("--workers", type=int, help="process count (capped by NKPHASE_WORKERS)")
    w.add_argument("--svg", action="store_true", help="also write fractions.svg")
    w.add_argument("--out", required=True, help="output directory")
    w.add_argument("-v", "--verbose", action="store_true")
    w.set_defaults(func=cmd_sweep)

    c = sub.add_parser("mc-check", help="Monte Carlo check of a closed-form probability")
    c.add_argument("--which", choices=["all-zero", "conflict", "module"], required=True)
    c.add_argument("--samples", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--p", type=float, default=0.3)
    c.add_argument("--n", type=int, default=50)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--alpha", type=float)
    c.set_defaults(func=cmd_mc_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidParameters, DimacsError, ValueError, OSError) as exc:
        print(f"nkphase {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
