import random

import pytest

from ilpbounds.bench import (DEFAULT_TRIALS, SUITES, agreement_instance, instance_rng, random_3cnf, run_suite,
                             smallest_support_constant, treedepth_by_deletion)
from ilpbounds.structure import RowGraph
from reference import ilp_solutions, treedepth_table


def test_instance_rng_is_independent_of_order():
    a = instance_rng("x", 1, 5).random()
    instance_rng("x", 1, 4).random()
    assert instance_rng("x", 1, 5).random() == a
    assert instance_rng("x", 2, 5).random() != a


def test_generators_respect_their_ranges():
    rng = random.Random(19)
    for _ in range(50):
        phi = random_3cnf(rng)
        assert 3 <= phi.num_vars <= 6 and 1 <= phi.num_clauses <= 5 * phi.num_vars
        inst, box = agreement_instance(rng)
        assert inst.k <= 3 and inst.ell <= 6 and inst.a.max_abs <= 3 and max(map(abs, inst.b)) <= 6
        assert all(min(r) >= 1 for r in inst.a.rows[:1])
        # the box holds every solution: the first row alone caps each coordinate
        wide = [max(box) + 2] * inst.ell
        assert ilp_solutions(inst.a.to_list(), inst.b, box) == ilp_solutions(inst.a.to_list(), inst.b, wide)


def test_deletion_oracle_matches_forest_table():
    best, pairs = treedepth_table(5)
    for mask in range(0, 1 << len(pairs), 7):
        g = RowGraph.from_edges(5, [p for i, p in enumerate(pairs) if mask >> i & 1])
        assert treedepth_by_deletion(g) == best[mask]


def test_smallest_support_constant():
    rows = [{"min_support": 3, "delta": 1, "k": 1}, {"min_support": 1, "delta": 3, "k": 1}]
    assert smallest_support_constant(rows) == 2


@pytest.mark.parametrize("name", ["graver-bounds", "gadgets", "solver-agreement", "support", "treedepth",
                                  "optimize"])
def test_small_runs_are_clean_and_reproducible(name):
    a = run_suite(name, seed=7, trials=5)
    assert a == run_suite(name, seed=7, trials=5)
    assert a["suite"] == name and a["trials"] == 5
    assert a["failed"] == 0


def test_pipeline_small_run():
    rep = run_suite("pipeline", seed=1, trials=3, max_vars=4)
    assert rep["failed"] == 0 and rep["measured"]["audit_violations"] == 0


def test_registry():
    assert set(SUITES) == set(DEFAULT_TRIALS)
    with pytest.raises(KeyError):
        run_suite("nope")
