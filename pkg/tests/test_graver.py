import random

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from ilpbounds.core import DimensionError, IntMatrix, block_diag, mat_vec
from ilpbounds.graver import (SearchSpaceTooLarge, certify_norm_bounds, check_conformal_decomposition,
                              conformal_leq, graver_basis, norm_bound)
from reference import below, graver_in_box, kernel_vectors


def test_conformal_order_examples():
    assert conformal_leq((0, 0), (5, -3))
    assert conformal_leq((1, -1), (2, -3))
    assert not conformal_leq((1, 1), (2, -3))
    with pytest.raises(DimensionError):
        conformal_leq((1,), (1, 2))


@pytest.mark.parametrize("rows,expected,g1", [
    ([[1, -1]], {(1, 1), (-1, -1)}, 2),
    ([[1, 1]], {(1, -1), (-1, 1)}, 2),
    ([[2, -1]], {(1, 2), (-1, -2)}, 3),
])
def test_one_row_examples(rows, expected, g1):
    basis = graver_basis(IntMatrix.from_rows(rows))
    assert set(basis.vectors) == expected
    assert basis.g1 == g1


def test_zero_matrix_gives_unit_vectors():
    basis = graver_basis(IntMatrix.zeros(1, 2))
    assert set(basis.vectors) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    rep = certify_norm_bounds(IntMatrix.zeros(1, 2))
    assert rep.g1 == 1 and rep.norm_bound_ok
    assert rep.one_row_bound is None


def test_full_rank_has_empty_basis():
    assert len(graver_basis(IntMatrix.identity(3))) == 0


def test_certify_with_slack():
    rep = certify_norm_bounds(IntMatrix.from_rows([[1, -1]]))
    assert rep.g1 == 2 and rep.norm_bound == 3 and rep.norm_bound_ok


def test_decomposable_case():
    a = block_diag([IntMatrix.from_rows([[1, -1]]), IntMatrix.from_rows([[2, -1]])])
    rep = certify_norm_bounds(a)
    assert rep.g1 == 3
    assert rep.blocks_g1 == (2, 3)
    assert rep.decomposable_ok


def test_two_row_connected_step_is_reported():
    rep = certify_norm_bounds(IntMatrix.from_rows([[1, 1, 0], [0, 1, -1]]))
    assert rep.step is not None and rep.step["ok"]


def test_one_row_sharpened_bound_fails_for_all_ones():
    # the kernel of (1 1 1) contains (1,-1,0) with norm 2 > 2*1 - 1
    rep = certify_norm_bounds(IntMatrix.from_rows([[1, 1, 1]]))
    assert rep.g1 == 2 and rep.one_row_bound == 1
    assert rep.one_row_ok is False


def test_search_space_limit():
    with pytest.raises(SearchSpaceTooLarge) as err:
        graver_basis(IntMatrix.from_rows([[1, 1, 0, 0], [0, 1, 1, 1]]), candidate_limit=100)
    assert err.value.bound == norm_bound(1, 2)
    assert err.value.estimate > 100


def test_norm_bound_formula():
    assert norm_bound(1, 1) == 3
    assert norm_bound(2, 2) == 125


small_matrices = st.integers(1, 2).flatmap(lambda k: st.integers(2, 3).flatmap(lambda n: st.lists(
    st.lists(st.integers(-2, 2), min_size=n, max_size=n), min_size=k, max_size=k)))


@settings(max_examples=60, deadline=None)
@given(small_matrices)
def test_box_basis_matches_reference(rows):
    radius = 3
    basis = graver_basis(IntMatrix.from_rows(rows), box=[radius] * len(rows[0]))
    assert sorted(basis.vectors) == graver_in_box(rows, radius)


@settings(max_examples=40, deadline=None)
@given(small_matrices)
def test_basis_is_sound_and_closed(rows):
    a = IntMatrix.from_rows(rows)
    basis = graver_basis(a, l1_bound=6)
    vecs = set(basis.vectors)
    for v in vecs:
        assert not any(mat_vec(a, v))
        assert tuple(-x for x in v) in vecs
        assert not any(w != v and below(w, v) for w in vecs)
    # every kernel vector of small norm has a basis vector below it
    for u in kernel_vectors(rows, 2):
        assert any(below(g, u) for g in vecs)


def test_norm_bound_holds_on_random_matrices():
    rng = random.Random(12)
    for _ in range(60):
        k, n = rng.randint(1, 2), rng.randint(2, 4)
        a = IntMatrix.from_rows([[rng.randint(-2, 2) for _ in range(n)] for _ in range(k)])
        try:
            rep = certify_norm_bounds(a)
        except SearchSpaceTooLarge:
            continue
        assert rep.norm_bound_ok


def test_decomposition_examples():
    a = IntMatrix.from_rows([[1, -1]])
    assert check_conformal_decomposition(a, (0, 0)) == []
    assert check_conformal_decomposition(a, (3, 3)) == [(3, (1, 1))]
    with pytest.raises(ValueError):
        check_conformal_decomposition(a, (1, 0))


def test_decomposition_reconstructs_random_kernel_vectors():
    rng = random.Random(13)
    for _ in range(30):
        rows = [[rng.randint(-2, 2) for _ in range(3)] for _ in range(2)]
        a = IntMatrix.from_rows(rows)
        ker = kernel_vectors(rows, 4)
        if not ker:
            continue
        u = rng.choice(ker)
        parts = check_conformal_decomposition(a, u)
        total = [0] * 3
        for lam, g in parts:
            assert lam > 0 and below(g, u)
            total = [t + lam * x for t, x in zip(total, g)]
        assert tuple(total) == u
