"""Command line front end.

Exit codes: 0 success or feasible, 1 infeasible (solve) or failed checks
(bench), 2 usage or input error, 3 budget exceeded, 4 verification
counterexample. Reports go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

from .cnf import parse_dimacs, to_dimacs
from .core import BudgetExceeded, ParseError, instance_to_json, load_instance, serialize_instance
from .detecting import (detecting_to_text, gen_detecting_deterministic, gen_detecting_random, parse_matrix,
                        verify_detecting)
from .gadgets import duplicate_to_pm1, encode_number, subset_sum_to_ilp
from .graver import SearchSpaceTooLarge, certify_norm_bounds, graver_basis
from .structure import DEFAULT_TD_LIMIT, SizeLimitExceeded, dual_treedepth

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_BUDGET, EXIT_COUNTEREXAMPLE = 0, 1, 2, 3, 4

DEFAULT_BUDGET_STATES = 2_000_000
DEFAULTS = {"json": False, "seed": 0, "budget_states": DEFAULT_BUDGET_STATES, "td_limit": DEFAULT_TD_LIMIT,
            "l1_bound": None}


class UsageError(Exception):
    pass


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--budget-states", type=int, help="search state budget (default 2000000)")
    p.add_argument("--td-limit", type=int, help="treedepth vertex limit (default 20)")
    p.add_argument("--l1-bound", type=int, help="l1 bound for Graver enumeration")
    return p


def _opt(args, name):
    return getattr(args, name, DEFAULTS[name])


def _read(path):
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected a comma separated integer list, got {text!r}") from None


# ------------------------------------------------------------- commands

def cmd_detect_gen(args) -> int:
    if args.random:
        mat = gen_detecting_random(args.d, args.cols, _opt(args, "seed"))
    else:
        mat = gen_detecting_deterministic(args.d, args.cols)
    if _opt(args, "json"):
        _write(args.output, _dump({"d": mat.d, "method": mat.method.value, "seed": _opt(args, "seed"),
                                   "blocks": [list(b) for b in mat.blocks], "matrix": mat.m.to_list()}))
    else:
        _write(args.output, detecting_to_text(mat))
    return EXIT_OK


def cmd_detect_verify(args) -> int:
    mat = parse_matrix(_read(args.input))
    rep = verify_detecting(mat, args.d, budget=_opt(args, "budget_states"))
    _write(args.output, _dump(rep.to_json()))
    return EXIT_OK if rep.verified else EXIT_COUNTEREXAMPLE


def cmd_reduce_sat(args) -> int:
    from .reduction import run_pipeline

    phi = parse_dimacs(_read(args.input))
    run = run_pipeline(phi, args.d, with_targets=args.stage == "pm1-targets")
    trace = run.trace.to_json()
    if args.stage == "34sat":
        body, inst = to_dimacs(run.sat34.formula), None
    else:
        inst = run.instances[args.stage]
        body = serialize_instance(inst)
    if _opt(args, "json"):
        report = {"stage": args.stage, "trace": trace}
        if inst is None:
            report["dimacs"] = body
        else:
            report["instance"] = instance_to_json(inst)
        _write(args.output, _dump(report))
    else:
        _write(args.output, body)
        if args.trace:
            _write(args.trace, _dump(trace))
    return EXIT_OK


def _emit_gadget(args, inst, designated, expected) -> int:
    if _opt(args, "json"):
        _write(args.output, _dump({"instance": instance_to_json(inst), "designated": designated,
                                   "expected_solutions": expected}))
    else:
        _write(args.output, serialize_instance(inst) + "# designated: " + json.dumps(designated, sort_keys=True)
               + "\n")
    return EXIT_OK


def cmd_gadget_number(args) -> int:
    g = encode_number(args.delta, args.value, args.forced)
    return _emit_gadget(args, g.instance, g.to_json()["designated"], g.expected_solutions)


def cmd_gadget_subsetsum(args) -> int:
    g = subset_sum_to_ilp(_int_list(args.values), args.target)
    inst = duplicate_to_pm1(g.instance) if args.pm1 else g.instance
    return _emit_gadget(args, inst, g.to_json()["designated"], None)


def cmd_structure_td(args) -> int:
    inst = load_instance(_read(args.input))
    limit = args.limit if args.limit is not None else _opt(args, "td_limit")
    td, forest = dual_treedepth(inst.a, limit)
    if _opt(args, "json"):
        _write(args.output, _dump({"td": td, "forest": forest.to_json()}))
    else:
        _write(args.output, f"{td}\n{json.dumps(forest.to_json())}\n")
    return EXIT_OK


def cmd_graver_basis(args) -> int:
    inst = load_instance(_read(args.input))
    basis = graver_basis(inst.a, l1_bound=_opt(args, "l1_bound"), td_limit=_opt(args, "td_limit"),
                         candidate_limit=_opt(args, "budget_states"))
    _write(args.output, _dump(basis.to_json()))
    return EXIT_OK


def cmd_graver_certify(args) -> int:
    inst = load_instance(_read(args.input))
    rep = certify_norm_bounds(inst.a, td_limit=_opt(args, "td_limit"),
                              candidate_limit=_opt(args, "budget_states"))
    _write(args.output, _dump(rep.to_json()))
    return EXIT_OK


def cmd_solve(args) -> int:
    from . import solvers

    inst = load_instance(_read(args.input))
    budget = args.box_budget if args.box_budget is not None else _opt(args, "budget_states")
    action = args.action
    if action == "optimize":
        if args.x0 is None:
            raise UsageError("solve optimize needs --x0")
        res = solvers.solve_graver_augment(inst, _int_list(args.x0), args.lambda_max)
        _write(args.output, _dump(res.to_json()))
        return EXIT_OK
    if action == "minsupport":
        try:
            rep = solvers.minimal_support(inst, args.c, budget)
        except ValueError as exc:
            if "infeasible" not in str(exc):
                raise
            _write(args.output, _dump({"verdict": solvers.INFEASIBLE}))
            return EXIT_INFEASIBLE
        _write(args.output, _dump(rep.to_json()))
        return EXIT_OK
    if action is not None:
        raise UsageError(f"unknown solve action {action!r}; use optimize or minsupport")
    if args.method == "box":
        rep = solvers.solve_box(inst, solvers.support_box(inst), budget)
    elif args.method == "dp":
        rep = solvers.solve_papadimitriou(inst, budget)
    elif args.method == "steinitz":
        rep = solvers.solve_steinitz(inst, args.radius, budget)
    else:
        rep = solvers.solve_propagate(inst, budget)
    _write(args.output, _dump(rep.to_json()))
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def cmd_bench(args) -> int:
    from .bench import SUITES, run_suite

    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(sorted(SUITES))}")
    kw = {}
    if args.n is not None:
        if args.suite != "pipeline":
            raise UsageError("--n only applies to the pipeline suite")
        kw["max_vars"] = args.n
    if args.c is not None:
        if args.suite != "support":
            raise UsageError("--c only applies to the support suite")
        kw["c"] = args.c
    report = run_suite(args.suite, _opt(args, "seed"), args.trials, args.workers, **kw)
    _write(args.output, _dump(report))
    return EXIT_OK if report["failed"] == 0 else EXIT_INFEASIBLE


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="ilpbounds", parents=[common],
                                     description="Detecting matrices, SAT-to-ILP reductions, gadgets, "
                                                 "treedepth, Graver bases and exact ILP solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(group, name, func, help_text):
        p = group.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--output", "-o", help="report path (default stdout)")
        p.set_defaults(func=func)
        return p

    detect = sub.add_parser("detect", help="detecting matrices").add_subparsers(dest="action", required=True)
    p = leaf(detect, "gen", cmd_detect_gen, "generate a d-detecting matrix")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--random", action="store_true", help="randomized construction (uses --seed)")
    p = leaf(detect, "verify", cmd_detect_verify, "verify a matrix read from --input or stdin")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--input", "-i")

    reduce_ = sub.add_parser("reduce", help="SAT to ILP pipeline").add_subparsers(dest="action", required=True)
    p = leaf(reduce_, "sat", cmd_reduce_sat, "reduce a DIMACS CNF formula")
    p.add_argument("--input", "-i")
    p.add_argument("--stage", default="binary", choices=["34sat", "ilp", "compressed", "binary", "pm1-targets"])
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--trace", help="write the JSON trace here (text mode)")

    gadget = sub.add_parser("gadget", help="small-coefficient gadgets").add_subparsers(dest="action", required=True)
    p = leaf(gadget, "number", cmd_gadget_number, "encode a number")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--value", type=int, required=True)
    p.add_argument("--forced", action="store_true")
    p = leaf(gadget, "subsetsum", cmd_gadget_subsetsum, "subset sum as an ILP")
    p.add_argument("--values", required=True, help="comma separated, e.g. 3,5,7")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--pm1", action="store_true", help="duplicate coefficient-2 variables")

    structure = sub.add_parser("structure", help="dual treedepth").add_subparsers(dest="action", required=True)
    p = leaf(structure, "td", cmd_structure_td, "exact dual treedepth and elimination forest")
    p.add_argument("--input", "-i")
    p.add_argument("--limit", type=int, help="vertex limit (overrides --td-limit)")

    graver = sub.add_parser("graver", help="Graver bases").add_subparsers(dest="action", required=True)
    p = leaf(graver, "basis", cmd_graver_basis, "enumerate the Graver basis")
    p.add_argument("--input", "-i")
    p = leaf(graver, "certify", cmd_graver_certify, "check the l1-norm bounds")
    p.add_argument("--input", "-i")

    p = leaf(sub, "solve", cmd_solve, "decide feasibility, optimize or minimize support")
    p.add_argument("action", nargs="?", choices=["optimize", "minsupport"])
    p.add_argument("--input", "-i")
    p.add_argument("--method", default="dp", choices=["box", "dp", "steinitz", "propagate"])
    p.add_argument("--radius", type=int)
    p.add_argument("--box-budget", type=int)
    p.add_argument("--x0", help="feasible starting point, comma separated")
    p.add_argument("--lambda-max", type=int)
    p.add_argument("--c", type=int, default=2, help="support constant")

    p = leaf(sub, "bench", cmd_bench, "run a seeded acceptance suite")
    p.add_argument("suite")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n", type=int, help="maximum variable count (pipeline)")
    p.add_argument("--c", type=int, help="support constant (support)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BudgetExceeded, SizeLimitExceeded, SearchSpaceTooLarge) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ParseError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
