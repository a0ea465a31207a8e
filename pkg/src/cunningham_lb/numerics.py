"""Exact rational arithmetic and exact linear solves.

Rationals are :class:`fractions.Fraction`; the solver works fraction-free on
Python integers (Bareiss elimination) and only divides at the very end.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

ExactRational = Fraction


class SingularMatrixError(ArithmeticError):
    pass


def rat(value) -> Fraction:
    """Coerce ints, fractions and ``"p/q"`` strings to a canonical Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass an int, Fraction or 'p/q'")
    return Fraction(value)


def rat_str(q: Fraction) -> str:
    """Serialize as ``"p/q"``, or ``"p"`` when the denominator is 1."""
    q = rat(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def rat_pow(base, exponent: int) -> Fraction:
    return rat(base) ** exponent


class RationalMatrix:
    """Dense row-major matrix of Fractions."""

    def __init__(self, rows: int, cols: int, entries: Iterable | None = None):
        self.rows = rows
        self.cols = cols
        if entries is None:
            self.entries = [Fraction(0)] * (rows * cols)
        else:
            self.entries = [rat(x) for x in entries]
        if len(self.entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(self.entries)}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(nrows, ncols, [x for r in rows for x in r])

    @classmethod
    def identity(cls, size: int) -> "RationalMatrix":
        m = cls(size, size)
        for i in range(size):
            m[i, i] = 1
        return m

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def __setitem__(self, ij, value) -> None:
        i, j = ij
        self.entries[i * self.cols + j] = rat(value)

    def row(self, i: int) -> list[Fraction]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> list[Fraction]:
        return self.entries[j::self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [self.row(i) for i in range(self.rows)]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(self.cols, self.rows,
                              [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    def select_columns(self, cols: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix(self.rows, len(cols),
                              [self[i, j] for i in range(self.rows) for j in cols])

    def matvec(self, x: Sequence) -> list[Fraction]:
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        out = []
        for i in range(self.rows):
            s = Fraction(0)
            for a, b in zip(self.row(i), x):
                if a:
                    s += a * b
            out.append(s)
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, RationalMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __repr__(self) -> str:
        return f"RationalMatrix({self.rows}x{self.cols})"


def _integer_rows(A: RationalMatrix, b: Sequence) -> list[list[int]]:
    # scale each augmented row by the lcm of its denominators
    out = []
    for i in range(A.rows):
        row = A.row(i) + [rat(b[i])]
        scale = lcm(*(q.denominator for q in row))
        out.append([q.numerator * (scale // q.denominator) for q in row])
    return out


def solve_linear_system(A: RationalMatrix, b: Sequence) -> list[Fraction]:
    """Return the unique exact solution of ``A x = b``.

    Bareiss fraction-free elimination on the row-scaled integer system, with
    the pivot chosen as the nonzero entry of least magnitude in the column
    (keeps the integers small; all divisions below are exact).
    """
    n = A.rows
    if A.cols != n:
        raise ValueError("matrix must be square")
    if len(b) != n:
        raise ValueError("right-hand side has the wrong length")
    if n == 0:
        return []
    M = _integer_rows(A, b)
    prev = 1
    for k in range(n):
        pivot_row = None
        for i in range(k, n):
            v = M[i][k]
            if v and (pivot_row is None or abs(v) < abs(M[pivot_row][k])):
                pivot_row = i
        if pivot_row is None:
            raise SingularMatrixError(f"matrix is singular (column {k})")
        if pivot_row != k:
            M[k], M[pivot_row] = M[pivot_row], M[k]
        rk = M[k]
        p = rk[k]
        for i in range(k + 1, n):
            ri = M[i]
            f = ri[k]
            if f == 0:
                if p != prev:
                    for j in range(k + 1, n + 1):
                        ri[j] = ri[j] * p // prev
                ri[k] = 0
                continue
            for j in range(k + 1, n + 1):
                ri[j] = (ri[j] * p - f * rk[j]) // prev
            ri[k] = 0
        prev = p
    x: list[Fraction] = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        ri = M[i]
        s = Fraction(ri[n])
        for j in range(i + 1, n):
            if ri[j]:
                s -= ri[j] * x[j]
        x[i] = s / ri[i]
    return x


def is_canonical(q: Fraction) -> bool:
    from math import gcd
    return q.denominator > 0 and gcd(abs(q.numerator), q.denominator) == 1
