"""Exact rational matrix routines.

numpy owns every float path in this package; these helpers exist only because
the identity tests demand bit-exact arithmetic over Fraction entries, which
numpy cannot provide.  All callers keep n small (a few dozen at most), so
O(n^3) elimination with Fraction coefficients is acceptable.
"""

from __future__ import annotations

from fractions import Fraction


def det_exact(rows):
    """Determinant of a square matrix of Fractions (or ints).

    Plain Gaussian elimination with partial pivoting by first nonzero entry.
    Returns Fraction(1) for the empty matrix.
    """
    n = len(rows)
    if n == 0:
        return Fraction(1)
    m = [[Fraction(x) for x in row] for row in rows]
    if any(len(row) != n for row in m):
        raise ValueError("matrix is not square")
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        pivot = m[col][col]
        det *= pivot
        for r in range(col + 1, n):
            if m[r][col]:
                factor = m[r][col] / pivot
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return det


def inverse_exact(rows):
    """Gauss-Jordan inverse over Fractions.  Raises on a singular input."""
    n = len(rows)
    m = [
        [Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(rows)
    ]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix has no inverse")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [row[n:] for row in m]


def solve_exact(rows, rhs):
    """Solve A x = b exactly.  rhs is a flat sequence; returns a list."""
    inv = inverse_exact(rows)
    return [sum(a * Fraction(b) for a, b in zip(row, rhs)) for row in inv]


def minor_exact(rows, idx):
    """Principal minor det(A[idx, idx]) over Fractions."""
    idx = list(idx)
    return det_exact([[rows[i][j] for j in idx] for i in idx])
