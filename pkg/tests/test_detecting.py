import itertools

import pytest

from ilpbounds.core import BudgetExceeded, IntMatrix, mat_vec
from ilpbounds.detecting import (Method, detecting_to_text, gen_detecting_deterministic, gen_detecting_random,
                                 parse_matrix, random_row_count, recursion_level, recursion_sizes,
                                 verify_detecting)


def brute_detecting(rows, d, cap):
    """No y in [0,cap]^m other than (d-1)1 with M y = M (d-1)1."""
    mat = IntMatrix.from_rows(rows)
    m = mat.n_cols
    target = mat_vec(mat, (d - 1,) * m)
    return all(y == (d - 1,) * m or mat_vec(mat, y) != target
               for y in itertools.product(range(cap + 1), repeat=m))


def test_sizes_follow_recurrence():
    assert recursion_sizes(2, 3) == [(2, 2), (6, 6), (14, 18)]
    assert recursion_sizes(4, 3) == [(4, 4), (20, 20), (84, 100)]


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_row_count_matches_closed_form(d):
    for i, (k, _) in enumerate(recursion_sizes(d, 5), start=1):
        assert k * (d - 1) == d ** (i + 1) - d


def test_column_closed_form_agrees_for_d2():
    for i, (_, m) in enumerate(recursion_sizes(2, 6), start=1):
        assert m == (i - 1) * 2 ** i + 2


@pytest.mark.parametrize("d,level", [(2, 1), (2, 2), (2, 3), (3, 2), (4, 2)])
def test_recursion_level_shape(d, level):
    assert recursion_level(d, level).shape == recursion_sizes(d, level)[-1]


def test_deterministic_examples():
    m = gen_detecting_deterministic(2, 2)
    assert m.m == IntMatrix.identity(2) and m.k == 2
    assert gen_detecting_deterministic(2, 6).k == 6
    assert gen_detecting_deterministic(2, 18).k == 14
    assert gen_detecting_deterministic(2, 18).method == Method.DETERMINISTIC


def test_deterministic_pads_with_blocks():
    m = gen_detecting_deterministic(2, 9)
    assert m.cols == 9
    assert m.blocks == ((6, 6), (2, 2), (1, 1))


def test_verify_examples():
    assert verify_detecting(IntMatrix.identity(3), 2).verified
    rep = verify_detecting(IntMatrix.from_rows([[1, 1]]), 2)
    assert not rep.verified
    assert rep.counterexample == ((2, 0), (1, 1))
    assert rep.to_json()["counterexample"] == {"u": [2, 0], "v": [1, 1]}


def test_zero_column_is_a_counterexample():
    rep = verify_detecting(IntMatrix.from_rows([[1, 0]]), 2)
    assert not rep.verified
    u, v = rep.counterexample
    assert u != v


@pytest.mark.parametrize("d,m", [(d, m) for d, top in ((2, 18), (3, 12)) for m in range(1, top + 1)])
def test_deterministic_outputs_verify(d, m):
    assert verify_detecting(gen_detecting_deterministic(d, m), d).verified


def test_verifier_agrees_with_enumeration_on_small_matrices():
    # every 2x3 {0,1} matrix, d = 2; cap 2 covers every coordinate since rhs <= 3
    for bits in itertools.product([0, 1], repeat=6):
        rows = [list(bits[:3]), list(bits[3:])]
        mat = IntMatrix.from_rows(rows)
        assert verify_detecting(mat, 2).verified == brute_detecting(rows, 2, 3)


def test_counterexample_is_genuine():
    mat = IntMatrix.from_rows([[1, 1, 0], [0, 1, 1]])
    rep = verify_detecting(mat, 3)
    u, v = rep.counterexample
    assert u != v and mat_vec(mat, u) == mat_vec(mat, v)
    assert min(u) >= 0 and set(v) <= {0, 1, 2}


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        verify_detecting(recursion_level(4, 3), 4, budget=1000)


def test_random_row_count_formula():
    assert random_row_count(2, 16) == 27


def test_random_is_seeded():
    a = gen_detecting_random(2, 8, seed=11)
    assert a == gen_detecting_random(2, 8, seed=11)
    assert a.m.rows[0] == (1,) * 8
    assert a.k == random_row_count(2, 8)


def test_random_success_rate():
    passed = sum(verify_detecting(gen_detecting_random(2, 8, s), 2).verified for s in range(50))
    assert passed >= 45


def test_text_round_trip():
    m = gen_detecting_deterministic(3, 7)
    assert parse_matrix(detecting_to_text(m)) == m.m


def test_rejects_non_binary():
    with pytest.raises(ValueError):
        verify_detecting(IntMatrix.from_rows([[2, 1]]), 2)
