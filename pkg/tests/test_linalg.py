from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from heckespan import linalg

small = st.integers(-6, 6)
matrices = st.integers(1, 5).flatmap(lambda n: st.integers(1, 5).flatmap(
    lambda m: st.lists(st.lists(small, min_size=m, max_size=m), min_size=n, max_size=n)))
square = st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n))


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_rank_matches_sympy(rows):
    assert linalg.bareiss_rank(rows) == sympy.Matrix(rows).rank()


@settings(max_examples=80, deadline=None)
@given(square)
def test_determinants_match_sympy(rows):
    d = sympy.Matrix(rows).det()
    assert linalg.bareiss_det(rows) == d
    assert linalg.determinant([[Fraction(x) for x in r] for r in rows]) == d


def test_rank_examples():
    assert linalg.bareiss_rank([[1, 2049], [1, -24]]) == 2
    assert linalg.bareiss_rank([[0, 0], [0, 0]]) == 0
    assert linalg.bareiss_rank([[1, 2], [2, 4]]) == 1


def test_rank_trace_monotone():
    rows = [[1, 0, 0], [2, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 3]]
    assert linalg.rank_trace(rows) == [1, 1, 2, 2, 3]


def test_integer_rows_clears_denominators():
    rows = linalg.integer_rows([[Fraction(1, 2), Fraction(1, 3)], [1, 1]])
    assert all(isinstance(x, int) for r in rows for x in r)
    assert linalg.bareiss_rank(rows) == 2


def test_solve_and_nullspace():
    sol = linalg.solve([[2, 1], [1, 3]], [3, 5])
    assert sol == [Fraction(4, 5), Fraction(7, 5)]
    ns = linalg.nullspace([[1, 2, 3]])
    assert len(ns) == 2 and all(v[0] + 2 * v[1] + 3 * v[2] == 0 for v in ns)


def test_bareiss_rank_scales_fractions():
    from fractions import Fraction
    from heckespan.linalg import bareiss_rank

    assert bareiss_rank([[Fraction(1, 240), Fraction(1, 240)], [1, 0]]) == 2
