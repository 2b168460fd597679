"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line; conftest.py prints them at the
end of the run. Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import itertools

import pytest

from ilpbounds.bench import run_suite
from ilpbounds.core import IntMatrix
from ilpbounds.detecting import gen_detecting_deterministic, recursion_level, recursion_sizes, verify_detecting
from ilpbounds.structure import RowGraph, treedepth_exact
from reference import ilp_solutions, treedepth_table

RESULTS = []

# tolerances pinned by the criteria
PIPELINE_FORMULAS = 200
GRAVER_MATRICES = 500
SUBSET_SUM_INSTANCES = 100
TD_PROFILE_SLACK = 2  # td <= ceil(lg(delta+1)) + 2
TD_CONSTANT_MAX = 3
AGREEMENT_INSTANCES = 500
SUPPORT_INSTANCES = 100
SUPPORT_C = 2
OPTIMIZE_INSTANCES = 100


def record(number, ok, detail):
    RESULTS.append(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    return ok


def test_1_detecting_sizes():
    sizes = [recursion_level(2, i).shape for i in (1, 2, 3)]
    closed = all(k == 2 ** (i + 1) - 2 for i, (k, _) in enumerate(recursion_sizes(2, 3), start=1))
    generated = [gen_detecting_deterministic(2, m).m.shape for m in (2, 6, 18)]
    ok = sizes == generated == [(2, 2), (6, 6), (14, 18)] and closed
    assert record(1, ok, f"d=2 levels 1-3 give {sizes}; generator gives {generated}")


def test_2_detecting_verification():
    failures = [(d, m) for d, top in ((2, 18), (3, 12)) for m in range(1, top + 1)
                if not verify_detecting(gen_detecting_deterministic(d, m), d).verified]
    ones = verify_detecting(IntMatrix.from_rows([[1, 1]]), 2)
    ok = not failures and not ones.verified and ones.counterexample == ((2, 0), (1, 1))
    assert record(2, ok, f"30 deterministic matrices, {len(failures)} unverified; "
                         f"(1 1) counterexample {ones.counterexample}")


def test_3_pipeline_soundness():
    rep = run_suite("pipeline", seed=0, trials=PIPELINE_FORMULAS)
    m = rep["measured"]
    ok = rep["failed"] == 0 and m["audit_violations"] == 0
    assert record(3, ok, f"{rep['passed']}/{rep['trials']} formulas agree at every stage "
                         f"({m['satisfiable']} sat, {m['unsatisfiable']} unsat), "
                         f"{m['audit_violations']} audit violations")


def test_4_graver_bounds():
    rep = run_suite("graver-bounds", seed=0, trials=GRAVER_MATRICES)
    m = rep["measured"]
    general = m["norm_bound_violations"] == 0
    one_row = m["one_row_violations"] == 0 and m["one_row_equalities"] > 0
    ok = general and one_row
    example = m["one_row_violation_examples"][:1]
    assert record(4, ok, f"{m['norm_bound_violations']} violations of the treedepth bound; one-row 2D-1 bound: "
                         f"{m['one_row_violations']} of {m['one_row_instances']} violate, "
                         f"{m['one_row_equalities']} equalities, e.g. {example}")


def test_5_gadget_exactness():
    rep = run_suite("gadgets", seed=0, trials=SUBSET_SUM_INSTANCES)
    m = rep["measured"]
    ok = rep["failed"] == 0 and m["encode_number_mismatches"] == 0 and m["max_td_increase"] <= 1
    assert record(5, ok, f"{m['encode_number_checked']} encode_number counts, {m['encode_number_mismatches']} wrong; "
                         f"{rep['passed']}/{rep['trials']} subset-sum checks; "
                         f"max treedepth increase {m['max_td_increase']}")


def test_6_treedepth_fidelity():
    mismatches, graphs = 0, 0
    for n in range(1, 7):
        best, pairs = treedepth_table(n)
        for mask in range(1 << len(pairs)):
            g = RowGraph.from_edges(n, [p for i, p in enumerate(pairs) if mask >> i & 1])
            graphs += 1
            mismatches += treedepth_exact(g)[0] != best[mask]
    path7 = treedepth_exact(RowGraph.from_edges(7, [(i, i + 1) for i in range(6)]))[0]
    rep = run_suite("treedepth", seed=0)
    profile = rep["measured"]["number_gadget_profile"]
    constant = rep["measured"]["additive_constant"]
    ok = (mismatches == 0 and path7 == 3 and rep["failed"] == 0
          and all(p["excess"] <= TD_PROFILE_SLACK for p in profile) and constant <= TD_CONSTANT_MAX)
    assert record(6, ok, f"{graphs} graphs on <= 6 vertices, {mismatches} mismatches; P7 = {path7}; "
                         f"encode_number additive constant {constant}")


def test_7_solver_agreement():
    rep = run_suite("solver-agreement", seed=0, trials=AGREEMENT_INSTANCES)
    m = rep["measured"]
    ok = rep["failed"] == 0 and m["disagreements"] == 0 and m["bad_witnesses"] == 0
    assert record(7, ok, f"{m['disagreements']} disagreements over {rep['trials']} instances "
                         f"({m['feasible']} feasible), {m['bad_witnesses']} bad witnesses")


def test_7_reference_agrees_with_box_verdicts():
    # independent enumeration on the same seeded family
    from ilpbounds.bench import agreement_instance, instance_rng
    from ilpbounds.solvers import solve_box
    wrong = 0
    for i in range(AGREEMENT_INSTANCES):
        inst, box = agreement_instance(instance_rng("solver-agreement", 0, i))
        wrong += solve_box(inst, box).feasible != bool(ilp_solutions(inst.a.to_list(), inst.b, box))
    assert wrong == 0


def test_8_support_bound():
    rep = run_suite("support", seed=0, trials=SUPPORT_INSTANCES, c=SUPPORT_C)
    m = rep["measured"]
    ok = rep["failed"] == 0
    assert record(8, ok, f"{rep['passed']}/{rep['trials']} within 2h at c={SUPPORT_C}; "
                         f"{m['reduction_runs']} reduction runs terminated; smallest c = {m['smallest_c']}")


def test_9_optimizer():
    rep = run_suite("optimize", seed=0, trials=OPTIMIZE_INSTANCES)
    ok = rep["failed"] == 0
    assert record(9, ok, f"{rep['passed']}/{rep['trials']} augmentation optima match exhaustive search")


@pytest.mark.parametrize("rows", [list(r) for r in itertools.product([-1, 0, 1, 2], repeat=2) if any(r)])
def test_4_one_row_matches_reference_in_box(rows):
    # the default-bound basis of a one-row matrix against box enumeration
    from ilpbounds.graver import graver_basis
    from reference import graver_in_box
    basis = graver_basis(IntMatrix.from_rows([rows]))
    radius = max(max(map(abs, v)) for v in basis.vectors) if basis.vectors else 1
    assert sorted(basis.vectors) == graver_in_box([rows], radius)
