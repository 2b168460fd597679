"""Seeded benchmark suites that exercise each module against exact oracles.

Every instance draws from its own ``random.Random`` (Mersenne Twister)
seeded with the string ``"<suite>/<seed>/<index>"``, so instances do not
depend on each other or on the worker that runs them. Reports contain no
timings and are byte-identical for the same arguments.
"""
from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from .cnf import CnfFormula
from .core import IlpInstance, IntMatrix, mat_vec
from .detecting import gen_detecting_deterministic, recursion_sizes, verify_detecting
from .gadgets import chosen_subset, duplicate_to_pm1, encode_number, subset_sum_to_ilp
from .graver import certify_norm_bounds
from .structure import RowGraph, dual_treedepth, treedepth_exact
from .solvers import (enumerate_solutions, minimal_support, optimize_box, reduce_support, solve_box,
                      solve_graver_augment, solve_papadimitriou, solve_steinitz, support_box)

MAX_FAILURES_SHOWN = 10


def instance_rng(suite: str, seed: int, index: int) -> random.Random:
    return random.Random(f"{suite}/{seed}/{index}")


def _lg_ceil(v: int) -> int:
    return (v - 1).bit_length()


# ------------------------------------------------------------ generators

def random_3cnf(rng: random.Random, max_vars: int = 6, max_ratio: int = 5) -> CnfFormula:
    """3 to max_vars variables and 1 to max_ratio * n clauses over 3 distinct variables.

    The default ratio straddles the satisfiability threshold (about 4.27) and
    keeps the encoded ILP below 484 rows, so compression never needs a
    detecting block larger than 84 x 100, the largest one verified exactly.
    """
    n = rng.randint(3, max_vars)
    m = rng.randint(1, max_ratio * n)
    clauses = tuple(tuple(v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), 3))
                    for _ in range(m))
    return CnfFormula(n, clauses)


def random_small_matrix(rng: random.Random, max_rows: int = 2, max_cols: int = 3, entry: int = 2) -> IntMatrix:
    """A non-zero matrix with entries in [-entry, entry]."""
    k, n = rng.randint(1, max_rows), rng.randint(1, max_cols)
    while True:
        rows = [[rng.randint(-entry, entry) for _ in range(n)] for _ in range(k)]
        if any(any(r) for r in rows):
            return IntMatrix.from_rows(rows)


def agreement_instance(rng: random.Random, max_rows: int = 3, max_cols: int = 6,
                       max_delta: int = 3, max_b: int = 6) -> tuple:
    """Standard-form instance whose first row is strictly positive.

    Returns (instance, box) where box_j = floor(b_1 / a_1j) contains every
    solution. Half of the right-hand sides are A x for a random x in [0,2],
    the rest uniform; both are resampled until ||b||_inf <= max_b.
    """
    k, n, delta = rng.randint(1, max_rows), rng.randint(1, max_cols), rng.randint(1, max_delta)
    rows = [[rng.randint(1, delta) for _ in range(n)]]
    rows += [[rng.randint(-delta, delta) for _ in range(n)] for _ in range(k - 1)]
    a = IntMatrix.from_rows(rows)
    while True:
        if rng.random() < 0.5:
            b = list(mat_vec(a, [rng.randint(0, 2) for _ in range(n)]))
        else:
            b = [rng.randint(0, max_b)] + [rng.randint(-max_b, max_b) for _ in range(k - 1)]
        if max(map(abs, b)) <= max_b:
            break
    box = [b[0] // rows[0][j] for j in range(n)]
    return IlpInstance(a, b), box


def support_instance(rng: random.Random, max_rows: int = 2, max_cols: int = 10, max_delta: int = 3) -> IlpInstance:
    """Feasible standard-form instance b = A x0 with a strictly positive first row."""
    k, n, delta = rng.randint(1, max_rows), rng.randint(1, max_cols), rng.randint(1, max_delta)
    rows = [[rng.randint(1, delta) for _ in range(n)]]
    rows += [[rng.randint(-delta, delta) for _ in range(n)] for _ in range(k - 1)]
    x0 = [rng.randint(0, 2) for _ in range(n)]
    a = IntMatrix.from_rows(rows)
    return IlpInstance(a, mat_vec(a, x0))


def optimize_instance(rng: random.Random, max_rows: int = 2, max_cols: int = 4, max_upper: int = 5) -> tuple:
    """Bounded instance with objective, plus a feasible starting point."""
    k, n = rng.randint(1, max_rows), rng.randint(1, max_cols)
    rows = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(k)]
    upper = [rng.randint(0, max_upper) for _ in range(n)]
    x0 = [rng.randint(0, u) for u in upper]
    w = [rng.randint(-5, 5) for _ in range(n)]
    a = IntMatrix.from_rows(rows)
    return IlpInstance(a, mat_vec(a, x0), None, upper, w), tuple(x0)


def random_graph(rng: random.Random, max_vertices: int = 9) -> RowGraph:
    n = rng.randint(1, max_vertices)
    p = rng.choice([0.2, 0.35, 0.5, 0.7])
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    return RowGraph.from_edges(n, edges)


def path_graph(n: int) -> RowGraph:
    return RowGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def treedepth_by_deletion(g: RowGraph) -> int:
    """Treedepth straight from the deletion recursion, memoized on vertex sets."""
    memo = {}

    def comps(mask):
        out = []
        while mask:
            seed = mask & -mask
            comp, frontier = seed, seed
            while frontier:
                v = (frontier & -frontier).bit_length() - 1
                frontier &= frontier - 1
                new = g.adj[v] & mask & ~comp
                comp |= new
                frontier |= new
            out.append(comp)
            mask &= ~comp
        return out

    def td(mask):
        if mask == 0:
            return 0
        if mask in memo:
            return memo[mask]
        parts = comps(mask)
        if len(parts) > 1:
            val = max(td(c) for c in parts)
        else:
            val = 1 + min(td(mask & ~(1 << v)) for v in range(g.n) if mask >> v & 1)
        memo[mask] = val
        return val

    return td((1 << g.n) - 1)


# --------------------------------------------------------------- harness

def _run_trials(fn: Callable, suite: str, seed: int, trials: int, workers: int, **kw) -> list:
    args = [(suite, seed, i, kw) for i in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, args))
    else:
        results = [fn(a) for a in args]
    return sorted(results, key=lambda r: r["id"])


def _summary(suite: str, seed: int, trials: int, results: list, measured: dict = None, extra: dict = None) -> dict:
    failed = [r for r in results if not r["ok"]]
    out = {
        "suite": suite,
        "seed": seed,
        "trials": trials,
        "passed": len(results) - len(failed),
        "failed": len(failed),
        "failures": failed[:MAX_FAILURES_SHOWN],
        "measured": measured or {},
    }
    if extra:
        out.update(extra)
    return out


# -------------------------------------------------------------- pipeline

def audit_ilp(inst: IlpInstance, n: int, m: int) -> list:
    """Shape checks of the direct encoding of a (3,4)-formula."""
    problems = []
    if inst.k != n + 2 * m:
        problems.append(f"k = {inst.k}, expected {n + 2 * m}")
    if inst.ell != 2 * n + 2 * m:
        problems.append(f"ell = {inst.ell}, expected {2 * n + 2 * m}")
    if not inst.a.entries() <= {0, 1}:
        problems.append("entries outside {0,1}")
    if max(sum(1 for x in r if x) for r in inst.a.rows) > 4:
        problems.append("a row has more than 4 non-zeros")
    if max(sum(1 for x in c if x) for c in inst.a.columns()) > 4:
        problems.append("a column has more than 4 non-zeros")
    if not set(inst.b) <= {1, 2, 3}:
        problems.append("targets outside {1,2,3}")
    return problems


def audit_pm1(inst: IlpInstance) -> list:
    problems = []
    if not inst.a.entries() <= {-1, 0, 1}:
        problems.append("entries outside {-1,0,1}")
    if not set(inst.b) <= {0, 1}:
        problems.append("targets outside {0,1}")
    return problems


def _pipeline_trial(args) -> dict:
    from .oracles import check_pipeline
    from .reduction import run_pipeline

    suite, seed, i, kw = args
    rng = instance_rng(suite, seed, i)
    phi = random_3cnf(rng, kw.get("max_vars", 6))
    run = run_pipeline(phi, kw.get("d", 4))
    check = check_pipeline(phi, kw.get("d", 4), run=run)
    phi34 = run.sat34.formula
    problems = audit_ilp(run.instances["ilp"], phi34.num_vars, phi34.num_clauses)
    problems += audit_pm1(run.instances["pm1-targets"])
    ok = check.agrees and not problems
    return {"id": i, "ok": ok, "n": phi.num_vars, "m": phi.num_clauses, "satisfiable": check.satisfiable,
            "verdicts": check.verdicts, "direct": check.direct, "audit": problems,
            "shapes": check.shapes}


def suite_pipeline(seed: int = 0, trials: int = 200, workers: int = 1, max_vars: int = 6, d: int = 4) -> dict:
    results = _run_trials(_pipeline_trial, "pipeline", seed, trials, workers, max_vars=max_vars, d=d)
    sat = sum(r["satisfiable"] for r in results)
    measured = {"satisfiable": sat, "unsatisfiable": len(results) - sat,
                "audit_violations": sum(len(r["audit"]) for r in results),
                "direct_checked": sum(1 for r in results if r["direct"]),
                "direct_undecided": sum(1 for r in results for v in r["direct"].values() if v is None),
                "largest_pm1_shape": max((r["shapes"]["pm1-targets"] for r in results), default=None)}
    for r in results:
        if r["ok"]:
            del r["verdicts"], r["direct"], r["shapes"]
    return _summary("pipeline", seed, trials, results, measured)


# --------------------------------------------------------- graver bounds

def _graver_trial(args) -> dict:
    suite, seed, i, kw = args
    rng = instance_rng(suite, seed, i)
    a = random_small_matrix(rng, kw.get("max_rows", 2), kw.get("max_cols", 3), kw.get("entry", 2))
    rep = certify_norm_bounds(a)
    return {"id": i, "ok": rep.norm_bound_ok, "matrix": a.to_list(), "report": rep.to_json()}


def suite_graver_bounds(seed: int = 0, trials: int = 500, workers: int = 1) -> dict:
    results = _run_trials(_graver_trial, "graver-bounds", seed, trials, workers)
    one_row = [r for r in results if r["report"]["one_row_bound"] is not None]
    one_row_bad = [r for r in one_row if not r["report"]["one_row_ok"]]
    equal = [r for r in one_row if r["report"]["g1"] == r["report"]["one_row_bound"]]
    decomposable = [r for r in results if r["report"]["decomposable_ok"] is not None]
    steps = [r for r in results if r["report"]["step"] is not None]
    measured = {
        "norm_bound_violations": sum(1 for r in results if not r["report"]["norm_bound_ok"]),
        "one_row_instances": len(one_row),
        "one_row_violations": len(one_row_bad),
        "one_row_violation_examples": [{"matrix": r["matrix"], "g1": r["report"]["g1"],
                                        "bound": r["report"]["one_row_bound"]} for r in one_row_bad[:5]],
        "one_row_equalities": len(equal),
        "one_row_equality_example": None if not equal else {"matrix": equal[0]["matrix"],
                                                             "g1": equal[0]["report"]["g1"]},
        "decomposable_instances": len(decomposable),
        "decomposable_violations": sum(1 for r in decomposable if not r["report"]["decomposable_ok"]),
        "step_instances": len(steps),
        "step_violations": sum(1 for r in steps if not r["report"]["step"]["ok"]),
        "max_g1": max((r["report"]["g1"] for r in results), default=0),
    }
    for r in results:
        if r["ok"]:
            del r["report"], r["matrix"]
    return _summary("graver-bounds", seed, trials, results, measured)


# ---------------------------------------------------------------- gadgets

def number_box(g) -> list:
    """Every solution of an encode_number gadget has all entries below 2^delta:
    y_0, u <= 1 from the first row, y_j = 2^j y_0, and z = sum of bits * y_j."""
    delta = len(g.designated["y"])
    return [2 ** delta - 1] * g.instance.ell


def _subset_trial(args) -> dict:
    suite, seed, i, kw = args
    rng = instance_rng(suite, seed, i)
    k = rng.randint(1, kw.get("max_items", 4))
    top = 2 ** kw.get("max_bits", 5) - 1
    values = [rng.randint(0, top) for _ in range(k)]
    target = rng.randint(0, top)
    brute = any(sum(c) == target for r in range(k + 1) for c in itertools.combinations(values, r))
    g = subset_sum_to_ilp(values, target)
    rep = solve_papadimitriou(g.instance)
    problems = []
    if rep.feasible != brute:
        problems.append("verdict differs from brute force")
    if rep.feasible and sum(values[j] for j in chosen_subset(g, rep.witness.x)) != target:
        problems.append("chosen subset misses the target")
    pm1 = duplicate_to_pm1(g.instance)
    if not pm1.a.entries() <= {-1, 0, 1}:
        problems.append("duplicated instance has entries outside {-1,0,1}")
    limit = kw.get("td_vertex_limit", 64)
    td0 = dual_treedepth(g.instance.a, limit)[0]
    td1 = dual_treedepth(pm1.a, limit)[0]
    if td1 - td0 > 1:
        problems.append("duplication raised the dual treedepth by more than 1")
    return {"id": i, "ok": not problems, "values": values, "target": target, "feasible": brute,
            "td": td0, "td_pm1": td1, "problems": problems}


def suite_gadgets(seed: int = 0, trials: int = 100, workers: int = 1, max_delta: int = 4) -> dict:
    counts = []
    count_failures = 0
    for delta in range(1, max_delta + 1):
        for s in range(2 ** delta):
            for forced in (False, True):
                g = encode_number(delta, s, forced)
                sols = enumerate_solutions(g.instance, number_box(g))
                values = sorted({x.x[g.designated["z"]] for x in sols})
                expected_values = [s] if forced else sorted({0, s})
                ok = len(sols) == g.expected_solutions and values == expected_values
                count_failures += not ok
                counts.append({"delta": delta, "s": s, "forced": forced, "count": len(sols), "ok": ok})
    number_rows = [dual_treedepth(duplicate_to_pm1(encode_number(d, 2 ** d - 1).instance).a)[0]
                   - dual_treedepth(encode_number(d, 2 ** d - 1).instance.a)[0] for d in range(1, max_delta + 1)]
    results = _run_trials(_subset_trial, "gadgets", seed, trials, workers)
    measured = {
        "encode_number_checked": len(counts),
        "encode_number_mismatches": count_failures,
        "subset_sum_feasible": sum(r["feasible"] for r in results),
        "max_td_increase": max([r["td_pm1"] - r["td"] for r in results] + number_rows),
    }
    for r in results:
        if r["ok"]:
            del r["problems"]
    out = _summary("gadgets", seed, trials, results, measured)
    out["failed"] += count_failures
    out["failures"] = ([c for c in counts if not c["ok"]] + out["failures"])[:MAX_FAILURES_SHOWN]
    return out


# -------------------------------------------------------------- treedepth

def number_td_profile(max_delta: int = 16) -> list:
    rows = []
    for delta in range(1, max_delta + 1):
        td, _ = dual_treedepth(encode_number(delta, 2 ** delta - 1).instance.a)
        base = _lg_ceil(delta + 1)
        rows.append({"delta": delta, "td": td, "log_term": base, "excess": td - base})
    return rows


def _td_trial(args) -> dict:
    suite, seed, i, kw = args
    g = random_graph(instance_rng(suite, seed, i), kw.get("max_vertices", 9))
    td, forest = treedepth_exact(g)
    ref = treedepth_by_deletion(g)
    ok = td == ref and forest.is_valid_for(g) and forest.height == td
    return {"id": i, "ok": ok, "n": g.n, "edges": len(g.edges()), "td": td, "reference": ref}


def suite_treedepth(seed: int = 0, trials: int = 200, workers: int = 1, max_delta: int = 16) -> dict:
    results = _run_trials(_td_trial, "treedepth", seed, trials, workers)
    profile = number_td_profile(max_delta)
    path7 = treedepth_exact(path_graph(7))[0]
    bad_profile = [p for p in profile if p["excess"] > 2]
    measured = {"path7": path7, "number_gadget_profile": profile,
                "additive_constant": max(p["excess"] for p in profile)}
    for r in results:
        if r["ok"]:
            del r["edges"]
    out = _summary("treedepth", seed, trials, results, measured)
    out["failed"] += len(bad_profile) + (path7 != 3)
    return out


# --------------------------------------------------------- solver agreement

def _agreement_trial(args) -> dict:
    suite, seed, i, kw = args
    inst, box = agreement_instance(instance_rng(suite, seed, i))
    reports = {"box": solve_box(inst, box), "dp": solve_papadimitriou(inst), "steinitz": solve_steinitz(inst)}
    verdicts = {name: rep.verdict for name, rep in reports.items()}
    # witnesses are re-checked here independently of the solvers' own check
    witness_ok = all(mat_vec(inst.a, rep.witness.x) == inst.b and min(rep.witness.x, default=0) >= 0
                     for rep in reports.values() if rep.feasible)
    ok = len(set(verdicts.values())) == 1 and witness_ok
    return {"id": i, "ok": ok, "a": inst.a.to_list(), "b": list(inst.b), "verdicts": verdicts,
            "witness_ok": witness_ok}


def suite_solver_agreement(seed: int = 0, trials: int = 500, workers: int = 1) -> dict:
    results = _run_trials(_agreement_trial, "solver-agreement", seed, trials, workers)
    feasible = sum(1 for r in results if r["verdicts"]["box"] == "feasible")
    measured = {"disagreements": sum(1 for r in results if len(set(r["verdicts"].values())) > 1),
                "bad_witnesses": sum(1 for r in results if not r["witness_ok"]),
                "feasible": feasible, "infeasible": len(results) - feasible}
    for r in results:
        if r["ok"]:
            del r["a"], r["b"], r["verdicts"]
    return _summary("solver-agreement", seed, trials, results, measured)


# ---------------------------------------------------------------- support

def _support_trial(args) -> dict:
    suite, seed, i, kw = args
    rng = instance_rng(suite, seed, i)
    inst = support_instance(rng)
    c = kw.get("c", 2)
    rep = minimal_support(inst, c)
    h = rep.bound_params["h"]
    starts = enumerate_solutions(inst, support_box(inst), limit=kw.get("starts_pool", 200))
    picks = rng.sample(starts, min(len(starts), kw.get("starts", 5)))
    reduced = []
    for x in picks:
        y, steps = reduce_support(inst, x.x, h)  # asserts strict descent on every step
        reduced.append(len(y.support))
    reduce_ok = all(s <= rep.support_size or s <= 2 * h for s in reduced)
    ok = rep.within_bound and reduce_ok
    return {"id": i, "ok": ok, "k": inst.k, "ell": inst.ell, "delta": inst.a.max_abs,
            "min_support": rep.support_size, "h": h, "reduced": reduced}


def smallest_support_constant(results: list) -> int:
    """Least c >= 1 with min_support <= 2 c ceil(lg(delta+1)) m on every instance."""
    c = 1
    while any(r["min_support"] > 2 * c * _lg_ceil(r["delta"] + 1) * r["k"] for r in results):
        c += 1
    return c


def suite_support(seed: int = 0, trials: int = 100, workers: int = 1, c: int = 2) -> dict:
    results = _run_trials(_support_trial, "support", seed, trials, workers, c=c)
    measured = {"c": c, "smallest_c": smallest_support_constant(results),
                "max_min_support": max((r["min_support"] for r in results), default=0),
                "reduction_runs": sum(len(r["reduced"]) for r in results)}
    return _summary("support", seed, trials, results, measured)


# --------------------------------------------------------------- optimize

def _optimize_trial(args) -> dict:
    suite, seed, i, kw = args
    inst, x0 = optimize_instance(instance_rng(suite, seed, i))
    res = solve_graver_augment(inst, x0)
    best = optimize_box(inst)
    ok = best is not None and res.value == inst.value(best.x)
    return {"id": i, "ok": ok, "augment_value": res.value,
            "box_value": None if best is None else inst.value(best.x), "iterations": res.iterations}


def suite_optimize(seed: int = 0, trials: int = 100, workers: int = 1) -> dict:
    results = _run_trials(_optimize_trial, "optimize", seed, trials, workers)
    measured = {"max_iterations": max((r["iterations"] for r in results), default=0)}
    return _summary("optimize", seed, trials, results, measured)


# -------------------------------------------------------------- detecting

def suite_detecting(seed: int = 0, trials: int = 0, workers: int = 1) -> dict:
    """Recursion sizes and exact verification of small deterministic matrices.

    Deterministic; seed and trials are recorded but unused.
    """
    sizes = [list(s) for s in recursion_sizes(2, 3)]
    checks = []
    for d, top in ((2, 18), (3, 12)):
        for m in range(1, top + 1):
            rep = verify_detecting(gen_detecting_deterministic(d, m), d)
            checks.append({"d": d, "m": m, "verified": rep.verified})
    ones = verify_detecting(IntMatrix.from_rows([[1, 1]]), 2)
    failed = sum(not c["verified"] for c in checks)
    failed += sizes != [[2, 2], [6, 6], [14, 18]]
    failed += ones.verified
    measured = {"sizes_d2": sizes, "verified": sum(c["verified"] for c in checks),
                "ones_row": ones.to_json()}
    return {"suite": "detecting", "seed": seed, "trials": len(checks), "passed": len(checks) + 2 - failed,
            "failed": failed, "failures": [c for c in checks if not c["verified"]], "measured": measured}


SUITES = {
    "pipeline": suite_pipeline,
    "graver-bounds": suite_graver_bounds,
    "gadgets": suite_gadgets,
    "solver-agreement": suite_solver_agreement,
    "support": suite_support,
    "treedepth": suite_treedepth,
    "optimize": suite_optimize,
    "detecting": suite_detecting,
}

DEFAULT_TRIALS = {"pipeline": 200, "graver-bounds": 500, "gadgets": 100, "solver-agreement": 500,
                  "support": 100, "treedepth": 200, "optimize": 100, "detecting": 0}


def run_suite(name: str, seed: int = 0, trials=None, workers: int = 1, **kw) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if trials is None:
        trials = DEFAULT_TRIALS[name]
    return SUITES[name](seed=seed, trials=trials, workers=workers, **kw)
