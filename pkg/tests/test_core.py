import random

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from ilpbounds.core import (DimensionError, IlpInstance, IntMatrix, ParseError, block_diag, instance_from_json,
                            instance_to_json, load_instance, mat_mul, mat_vec, parse_instance,
                            serialize_instance)
from reference import schoolbook_matmul


def test_parse_sugar():
    inst = parse_instance("1 2 / 1 1 / = 2")
    assert inst.a.to_list() == [[1, 1]]
    assert inst.b == (2,)


def test_parse_canonical_with_bounds():
    inst = parse_instance("ilp 1 2\n1 1\nb: 2\nl: 0 1\nu: 3 *\nw: 1 -1\n")
    assert inst.lower == (0, 1)
    assert inst.upper == (3, None)
    assert inst.objective == (1, -1)


def test_parse_comments():
    inst = parse_instance("# header next\nilp 1 2  # one row\n1 1\nb: 2 # target\n")
    assert inst.b == (2,)


def test_parse_dimension_mismatch():
    with pytest.raises(DimensionError):
        parse_instance("ilp 2 2\n1 0\n0 1\nb: 1 1 1\n")


@pytest.mark.parametrize("text", ["", "ilp 1\n1\nb: 1", "ilp 1 1\nx\nb: 1", "ilp 1 1\n1\n", "ilp 1 1\n1\nq: 1"])
def test_parse_errors(text):
    with pytest.raises((ParseError, DimensionError)):
        parse_instance(text)


def test_matrix_rejects_ragged_rows():
    with pytest.raises(DimensionError):
        IntMatrix.from_rows([[1, 2], [3]])


def test_mat_vec_examples():
    assert mat_vec(IntMatrix.identity(3), (4, 5, 6)) == (4, 5, 6)
    assert mat_vec(IntMatrix.from_rows([[1, 1]]), (2, 0)) == (2,)


def test_mat_mul_matches_schoolbook():
    rng = random.Random(3)
    for _ in range(50):
        a = [[rng.randint(-5, 5) for _ in range(4)] for _ in range(3)]
        b = [[rng.randint(-5, 5) for _ in range(2)] for _ in range(4)]
        assert mat_mul(IntMatrix.from_rows(a), IntMatrix.from_rows(b)).to_list() == schoolbook_matmul(a, b)


def test_mat_mul_big_entries_stay_exact():
    a = IntMatrix.from_rows([[2 ** 40, 1], [3, 2 ** 41]])
    b = IntMatrix.from_rows([[2 ** 30], [2 ** 35]])
    assert mat_mul(a, b).to_list() == schoolbook_matmul(a.to_list(), b.to_list())


def test_block_diag():
    m = block_diag([IntMatrix.from_rows([[1, 2]]), IntMatrix.from_rows([[3], [4]])])
    assert m.to_list() == [[1, 2, 0], [0, 0, 3], [0, 0, 4]]


def test_bounds_validation():
    a = IntMatrix.from_rows([[1, 1]])
    with pytest.raises(ValueError):
        IlpInstance(a, (1,), lower=(2, 0), upper=(1, 1))
    with pytest.raises(DimensionError):
        IlpInstance(a, (1, 2))


instances = st.integers(1, 3).flatmap(lambda k: st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=k, max_size=k),
    st.lists(st.integers(-20, 20), min_size=k, max_size=k),
    st.one_of(st.none(), st.lists(st.one_of(st.none(), st.integers(0, 9)), min_size=n, max_size=n)),
    st.one_of(st.none(), st.lists(st.integers(-5, 5), min_size=n, max_size=n)),
)))


@settings(max_examples=100, deadline=None)
@given(instances)
def test_text_round_trip(data):
    rows, b, upper, w = data
    inst = IlpInstance(IntMatrix.from_rows(rows), b, None, upper, w)
    text = serialize_instance(inst)
    again = parse_instance(text)
    assert again == inst
    assert serialize_instance(again) == text


@settings(max_examples=50, deadline=None)
@given(instances)
def test_json_round_trip(data):
    rows, b, upper, w = data
    inst = IlpInstance(IntMatrix.from_rows(rows), b, None, upper, w)
    assert instance_from_json(instance_to_json(inst)) == inst
    assert load_instance(serialize_instance(inst)) == inst


def test_feasibility_check():
    inst = IlpInstance(IntMatrix.from_rows([[1, 1]]), (2,), upper=(1, 5))
    assert inst.is_feasible((1, 1))
    assert not inst.is_feasible((2, 0))
    assert not inst.is_feasible((-1, 3))
