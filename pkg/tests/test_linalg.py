"""Exact rational linear algebra against numpy oracles."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fgfflab._linalg import det_exact, inverse_exact, minor_exact, solve_exact

@given(st.integers(min_value=1, max_value=5), st.randoms(use_true_random=False))
@settings(deadline=None, max_examples=60)
def test_det_matches_numpy(n, rnd):
    mat = [[Fraction(rnd.randint(-6, 6)) for _ in range(n)] for _ in range(n)]
    want = round(np.linalg.det(np.array(mat, dtype=float)))
    assert det_exact(mat) == want


def test_det_empty_is_one():
    assert det_exact([]) == 1


def test_det_known_values():
    assert det_exact([[Fraction(3)]]) == 3
    assert det_exact([[1, 2], [3, 4]]) == -2
    assert det_exact([[2, 0, 1], [1, 1, 0], [0, 3, 1]]) == 5


@given(st.integers(min_value=1, max_value=5), st.randoms(use_true_random=False))
@settings(deadline=None, max_examples=40)
def test_inverse_round_trip(n, rnd):
    mat = [[Fraction(rnd.randint(-5, 5)) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        mat[i][i] += 12  # diagonally dominant, so invertible
    inv = inverse_exact(mat)
    for i in range(n):
        for j in range(n):
            acc = sum(mat[i][k] * inv[k][j] for k in range(n))
            assert acc == (1 if i == j else 0)


def test_inverse_singular_raises():
    with pytest.raises(ZeroDivisionError):
        inverse_exact([[1, 2], [2, 4]])


def test_solve_exact():
    mat = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
    b = [Fraction(5), Fraction(10)]
    x = solve_exact(mat, b)
    for i in range(2):
        assert sum(mat[i][k] * x[k] for k in range(2)) == b[i]


def test_minor_is_det_of_submatrix():
    mat = [[1, 2, 3], [4, 5, 6], [7, 8, 10]]
    assert minor_exact(mat, [0, 2]) == det_exact([[1, 3], [7, 10]])
    assert minor_exact(mat, []) == 1
