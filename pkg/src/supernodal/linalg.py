"""Exact Gaussian elimination over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import SingularSystem


def _copy(a: Sequence[Sequence], b: Sequence | None = None) -> list[list[Fraction]]:
    rows = [[Fraction(x) for x in row] for row in a]
    if b is not None:
        for row, rhs in zip(rows, b):
            row.append(Fraction(rhs))
    return rows


def _eliminate(m: list[list[Fraction]], ncols: int) -> list[int]:
    """Reduce ``m`` in place to reduced row-echelon form over its first ``ncols`` columns.

    Partial pivoting picks the largest magnitude; returns the pivot columns.
    """
    pivots = []
    r = 0
    for c in range(ncols):
        best = max(range(r, len(m)), key=lambda i: abs(m[i][c]), default=None)
        if best is None or m[best][c] == 0:
            continue
        m[r], m[best] = m[best], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return pivots


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Unique solution of the square system ``a x = b``; SingularSystem otherwise."""
    n = len(a)
    if any(len(row) != n for row in a) or len(b) != n:
        raise ValueError("solve needs a square system")
    m = _copy(a, b)
    pivots = _eliminate(m, n)
    if len(pivots) < n:
        raise SingularSystem(len(pivots), n)
    return [m[i][n] for i in range(n)]


def inverse(a: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(a)
    m = _copy(a)
    for i, row in enumerate(m):
        row.extend(Fraction(int(i == j)) for j in range(n))
    pivots = _eliminate(m, n)
    if len(pivots) < n:
        raise SingularSystem(len(pivots), n)
    return [row[n:] for row in m]


def rank(a: Sequence[Sequence]) -> int:
    if not a:
        return 0
    m = _copy(a)
    return len(_eliminate(m, len(m[0])))


def solve_partial(a: Sequence[Sequence], b: Sequence) -> list[Fraction | None]:
    """Solve a possibly singular but consistent system.

    Returns the value of every unknown the system pins down and ``None`` for
    the rest.  An inconsistent system raises SingularSystem.
    """
    n = len(a[0]) if a else 0
    m = _copy(a, b)
    pivots = _eliminate(m, n)
    for row in m[len(pivots):]:
        if row[n] != 0:
            raise SingularSystem(len(pivots), n, "inconsistent equations")
    free = [c for c in range(n) if c not in set(pivots)]
    out: list[Fraction | None] = [None] * n
    for r, c in enumerate(pivots):
        if all(m[r][f] == 0 for f in free):
            out[c] = m[r][n]
    return out
