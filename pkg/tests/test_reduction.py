import itertools
import random

import pytest

from ilpbounds.cnf import (CnfFormula, brute_force_sat, dpll_sat, is_34_form, lift_assignment, parse_dimacs,
                           sat_to_34sat, to_dimacs)
from ilpbounds.core import IlpInstance, IntMatrix, mat_vec
from ilpbounds.detecting import gen_detecting_deterministic
from ilpbounds.oracles import (certify_carries, certify_compression, certify_targets, check_pipeline,
                               cpsat_sat, cpsat_solve)
from ilpbounds.reduction import (STAGES, assignment_from_ilp, coefficient_witness, compress_constraints,
                                 ilp_witness, reduce_coefficients, reduce_targets, run_pipeline, sat34_to_ilp,
                                 target_witness)
from reference import ilp_solutions, sat_models


def random_cnf(rng, n, m, width=3):
    return CnfFormula(n, tuple(tuple(v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), width))
                               for _ in range(m)))


def test_dimacs_reader_is_tolerant():
    phi = parse_dimacs("c comment\np cnf 3 2\n1 -2 0 3\n0\n-1 2 0\n")
    assert phi.num_vars == 3
    assert phi.clauses == ((1, -2), (3,), (-1, 2))
    assert parse_dimacs(to_dimacs(phi)) == phi


def test_brute_force_matches_reference():
    rng = random.Random(1)
    for _ in range(40):
        phi = random_cnf(rng, 5, rng.randint(1, 25))
        assert (brute_force_sat(phi) is not None) == bool(sat_models(phi.num_vars, phi.clauses))
        assert (dpll_sat(phi) is not None) == bool(sat_models(phi.num_vars, phi.clauses))


def test_34_form_untouched_when_already_valid():
    phi = CnfFormula(3, ((1, 2, -3), (-1, -2, 3)))
    assert is_34_form(phi)
    assert is_34_form(sat_to_34sat(phi).formula)


def test_heavy_variable_is_split():
    # variable 1 occurs six times
    phi = CnfFormula(7, tuple((1, a, b) for a, b in [(2, 3), (-2, 4), (3, -4), (5, 6), (-5, 7), (6, -7)]))
    res = sat_to_34sat(phi)
    assert is_34_form(res.formula)
    assert max(res.formula.occurrences().values()) <= 4
    assert (brute_force_sat(phi) is None) == (cpsat_sat(res.formula) is None)


def test_unsatisfiable_stays_unsatisfiable():
    clauses = tuple(tuple(s * v for s, v in zip(signs, (1, 2, 3))) for signs in itertools.product([1, -1], repeat=3))
    phi = CnfFormula(3, clauses)
    assert brute_force_sat(phi) is None
    assert cpsat_sat(sat_to_34sat(phi).formula) is None


def test_rewrite_is_equisatisfiable_and_lifts():
    rng = random.Random(2)
    for _ in range(40):
        n = rng.randint(3, 6)
        phi = random_cnf(rng, n, rng.randint(1, 6 * n))
        res = sat_to_34sat(phi)
        assert is_34_form(res.formula)
        model = brute_force_sat(phi)
        out = cpsat_sat(res.formula)
        assert (model is None) == (out is None)
        if model is not None:
            assert res.formula.evaluate(lift_assignment(res, model))
            assert phi.evaluate(res.pull_back(out, phi.num_vars))


def test_short_clauses_are_padded():
    phi = CnfFormula(2, ((1,), (-1, 2)))
    res = sat_to_34sat(phi)
    assert is_34_form(res.formula)
    assert cpsat_sat(res.formula) is not None


def test_long_clauses_rejected():
    with pytest.raises(ValueError):
        sat_to_34sat(CnfFormula(4, ((1, 2, 3, 4),)))


def test_encoding_of_single_variable():
    ilp, _ = sat34_to_ilp(CnfFormula(1, ()))
    assert (ilp.k, ilp.ell) == (1, 2)
    assert ilp.a.to_list() == [[1, 1]] and ilp.b == (1,)


def test_encoding_of_single_clause():
    phi = CnfFormula(3, ((1, 2, -3),))
    ilp, _ = sat34_to_ilp(phi)
    assert (ilp.k, ilp.ell) == (5, 8)
    sols = ilp_solutions(ilp.a.to_list(), ilp.b, [3] * ilp.ell)
    assert sols
    for x in sols:
        assert phi.evaluate(assignment_from_ilp(phi, x))


def test_encoding_audit_on_34_formulas():
    rng = random.Random(4)
    for _ in range(100):
        phi = sat_to_34sat(random_cnf(rng, rng.randint(3, 6), rng.randint(1, 20))).formula
        ilp, _ = sat34_to_ilp(phi)
        n, m = phi.num_vars, phi.num_clauses
        assert (ilp.k, ilp.ell) == (n + 2 * m, 2 * n + 2 * m)
        assert ilp.a.entries() <= {0, 1}
        assert max(sum(map(bool, r)) for r in ilp.a.rows) <= 4
        assert max(sum(map(bool, c)) for c in ilp.a.columns()) <= 4
        assert set(ilp.b) <= {1, 2, 3}


def test_ilp_witness_is_feasible():
    phi = CnfFormula(3, ((1, 2, -3), (-1, 2, 3)))
    ilp, _ = sat34_to_ilp(phi)
    for model in sat_models(3, phi.clauses):
        assert ilp.is_feasible(ilp_witness(phi, model))


def test_compression_with_identity_is_unchanged():
    inst = IlpInstance(IntMatrix.from_rows([[1, 1, 0], [0, 1, 1]]), (1, 2))
    det = gen_detecting_deterministic(4, 2)
    assert compress_constraints(inst, det) == inst


def test_compression_norms():
    rng = random.Random(5)
    for _ in range(20):
        phi = sat_to_34sat(random_cnf(rng, 5, rng.randint(5, 20))).formula
        ilp, _ = sat34_to_ilp(phi)
        det = gen_detecting_deterministic(4, ilp.k)
        out = compress_constraints(ilp, det)
        assert out.k == det.k
        assert out.a.max_abs <= 4
        assert max(out.b) <= ilp.k * max(ilp.b)


def test_compression_preserves_feasibility_small():
    # direct solves of the compressed system are only practical below ~100 rows
    rng = random.Random(6)
    checked = 0
    while checked < 15:
        phi = sat_to_34sat(random_cnf(rng, 3, rng.randint(1, 10))).formula
        ilp, _ = sat34_to_ilp(phi)
        if ilp.k >= 90:
            continue
        out = compress_constraints(ilp, gen_detecting_deterministic(4, ilp.k))
        assert cpsat_solve(ilp).feasible == cpsat_solve(out).feasible
        checked += 1


def test_coefficient_reduction_of_three():
    inst = IlpInstance(IntMatrix.from_rows([[3]]), (3,))
    out, prov, delta = reduce_coefficients(inst)
    assert delta == 2
    assert out.k == 4  # delta bit rows plus 2(delta - 1) complement rows
    assert out.ell - inst.ell == 3
    assert out.a.entries() <= {0, 1}
    sols = ilp_solutions(out.a.to_list(), out.b, [4] * out.ell)
    assert [x[0] for x in sols] == [1]
    assert out.is_feasible(coefficient_witness(inst, (1,)))


def test_coefficient_reduction_with_unit_coefficients():
    inst = IlpInstance(IntMatrix.from_rows([[1]]), (1,))
    out, _, delta = reduce_coefficients(inst)
    assert delta == 1 and out == inst


def test_coefficient_reduction_preserves_feasibility():
    rng = random.Random(7)
    for _ in range(50):
        k, n = rng.randint(1, 2), rng.randint(1, 3)
        rows = [[rng.randint(0, 7) for _ in range(n)] for _ in range(k)]
        b = [rng.randint(0, 12) for _ in range(k)]
        inst = IlpInstance(IntMatrix.from_rows(rows), b)
        out, _, _ = reduce_coefficients(inst)
        assert out.a.entries() <= {0, 1}
        before = ilp_solutions(rows, b, [12] * n)
        assert cpsat_solve(out).feasible == bool(before)
        for x in before[:3]:
            assert out.is_feasible(coefficient_witness(inst, x))


def test_target_reduction_zero_targets():
    inst = IlpInstance(IntMatrix.from_rows([[1, 1]]), (0,))
    out, _, s = reduce_targets(inst)
    assert s == 0
    assert out.a.rows[0] == (1, 1, 0)
    sols = ilp_solutions(out.a.to_list(), out.b, [3] * out.ell)
    assert sols == [(0, 0, 1)]


def test_target_reduction_example():
    inst = IlpInstance(IntMatrix.from_rows([[1, 1]]), (3,))
    out, _, s = reduce_targets(inst)
    assert s == 2
    assert out.a.entries() <= {-1, 0, 1} and set(out.b) <= {0, 1}
    assert out.is_feasible(target_witness(inst, (1, 2)))
    sols = ilp_solutions(out.a.to_list(), out.b, [3] * out.ell)
    assert sorted(x[:2] for x in sols) == sorted(ilp_solutions([[1, 1]], [3], [3, 3]))
    assert all(x[2:] == (1, 1, 2) for x in sols)


def test_trace_and_shapes():
    phi = CnfFormula(4, ((1, 2, 3), (-1, -2, 4), (2, -3, -4)))
    run = run_pipeline(phi)
    names = [s.name for s in run.trace.stages]
    assert names == list(STAGES)
    compressed = run.trace.stages[2]
    assert compressed.k == run.detecting.k
    pm1 = run.instances["pm1-targets"]
    assert pm1.a.entries() <= {-1, 0, 1} and set(pm1.b) <= {0, 1}


def test_certificates_pass_and_detect_tampering():
    phi = CnfFormula(4, ((1, 2, 3), (-1, -2, 4), (2, -3, -4), (-2, 3, 4)))
    run = run_pipeline(phi)
    ilp, comp, binary, pm1 = (run.instances[s] for s in STAGES[1:])
    assert certify_compression(ilp, comp, run.detecting).ok
    assert certify_carries(comp, binary, run.delta).ok
    assert certify_targets(binary, pm1, run.target_bits).ok
    bad = IlpInstance(comp.a, (comp.b[0] + 1,) + comp.b[1:])
    assert not certify_compression(ilp, bad, run.detecting).ok


def test_pipeline_check_satisfiable_small():
    phi = CnfFormula(4, ((1, 2, 3), (-1, 2, 4)))
    check = check_pipeline(phi)
    assert check.satisfiable and check.agrees
    assert all(check.verdicts.values())
    assert set(check.direct) == set(STAGES[1:])


def test_pipeline_check_unsatisfiable():
    clauses = tuple(tuple(s * v for s, v in zip(signs, (1, 2, 3))) for signs in itertools.product([1, -1], repeat=3))
    check = check_pipeline(CnfFormula(3, clauses))
    assert not check.satisfiable and check.agrees
    assert not any(check.verdicts.values())


def test_pipeline_witnesses_push_forward():
    phi = CnfFormula(3, ((1, -2, 3),))
    run = run_pipeline(phi)
    model = brute_force_sat(phi)
    wits = run.witnesses(model)
    for stage, inst in run.instances.items():
        assert inst.is_feasible(wits[stage]), stage
    assert phi.evaluate(run.pull_back(wits["ilp"]))
    assert mat_vec(run.instances["compressed"].a, wits["compressed"]) == run.instances["compressed"].b
