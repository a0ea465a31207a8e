from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cunningham_lb.numerics import (RationalMatrix, SingularMatrixError, is_canonical, rat,
                                    rat_pow, rat_str, solve_linear_system)


def test_rat_rejects_floats():
    with pytest.raises(TypeError):
        rat(0.5)


def test_rat_parses_strings():
    assert rat("6/4") == Fraction(3, 2)
    assert is_canonical(rat("6/4"))


def test_rat_str():
    assert rat_str(Fraction(3, 1)) == "3"
    assert rat_str(Fraction(-1, 7)) == "-1/7"


def test_signed_powers():
    assert rat_pow(-3, 4) == 81
    assert rat_pow(-3, 5) == -243


def test_matrix_basics():
    m = RationalMatrix.from_rows([[1, 2], [3, 4]])
    assert m.transpose().to_rows() == [[1, 3], [2, 4]]
    assert m.matvec([1, 1]) == [3, 7]
    assert m.select_columns([1]).to_rows() == [[2], [4]]
    assert RationalMatrix.identity(2) == RationalMatrix.from_rows([[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        RationalMatrix.from_rows([[1], [1, 2]])


def test_solve_small():
    A = RationalMatrix.from_rows([[2, 1], [1, 3]])
    assert solve_linear_system(A, [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]


def test_solve_needs_row_swap():
    A = RationalMatrix.from_rows([[0, 1], [1, 0]])
    assert solve_linear_system(A, [5, 7]) == [7, 5]


def test_singular():
    A = RationalMatrix.from_rows([[1, 2], [2, 4]])
    with pytest.raises(SingularMatrixError):
        solve_linear_system(A, [1, 2])


def test_tiny_probabilities_stay_exact():
    eps = Fraction(1, 7 ** 16)
    half = (1 - eps) / 2
    A = RationalMatrix.from_rows([[1, -half, -half], [-1, 1, 0], [-1, 0, 1]])
    # x0 leaks eps to a zero-valued sink, so x = 1/eps * (reward eps)
    x = solve_linear_system(A, [eps * 5, 0, 0])
    assert x == [5, 5, 5]


fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(lambda k: st.tuples(
    st.lists(st.lists(fractions, min_size=k, max_size=k), min_size=k, max_size=k),
    st.lists(fractions, min_size=k, max_size=k))))
def test_solution_satisfies_system(data):
    rows, x_true = data
    A = RationalMatrix.from_rows(rows)
    b = A.matvec(x_true)
    try:
        x = solve_linear_system(A, b)
    except SingularMatrixError:
        return
    assert A.matvec(x) == b
    assert all(is_canonical(q) for q in x)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=9, max_size=9))
def test_solver_matches_cramer_on_3x3(entries):
    A = RationalMatrix(3, 3, entries)
    r = A.to_rows()
    det = (r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
           - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
           + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]))
    b = [1, 2, 3]
    if det == 0:
        with pytest.raises(SingularMatrixError):
            solve_linear_system(A, b)
        return
    x = solve_linear_system(A, b)
    for col in range(3):
        M = [row[:] for row in r]
        for i in range(3):
            M[i][col] = Fraction(b[i])
        d = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
             - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
             + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))
        assert x[col] == d / det
