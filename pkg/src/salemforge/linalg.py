"""Exact integer and rational matrix helpers.

Matrices are tuples of row tuples.  Everything here is exact: Python ints for
integer work and :class:`fractions.Fraction` when division is unavoidable.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import DimensionError

Matrix = tuple[tuple[int, ...], ...]
Vector = tuple[int, ...]


def as_matrix(rows, square=False) -> Matrix:
    m = tuple(tuple(int(x) for x in row) for row in rows)
    if m and len({len(r) for r in m}) != 1:
        raise DimensionError("ragged matrix")
    if square and any(len(r) != len(m) for r in m):
        raise DimensionError(f"matrix is {len(m)}x{len(m[0]) if m else 0}, not square")
    return m


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def transpose(a: Sequence[Sequence]) -> tuple:
    return tuple(zip(*a)) if a else ()


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def matvec(a: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def mat_sub(a, b) -> tuple:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_add(a, b) -> tuple:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def bilinear(gram, x, y):
    """``x^T gram y``."""
    return sum(xi * g for xi, g in zip(x, matvec(gram, y)))


def max_bits(a) -> int:
    return max((abs(x).bit_length() for row in a for x in row), default=0)


def block_diag(blocks: Sequence[Matrix]) -> Matrix:
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            out[off + i][off:off + len(row)] = row
        off += len(b)
    return as_matrix(out)


def det(a) -> int:
    """Determinant of an integer matrix by Bareiss fraction-free elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(r) for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def rref(a) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in a]
    rows = len(m)
    cols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m[:r], pivots


def rank(a) -> int:
    if not a:
        return 0
    return len(rref(a)[1])


def nullspace(a, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right kernel ``{x : a x = 0}`` over Q."""
    if ncols is None:
        ncols = len(a[0])
    if not a:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def inverse(a) -> list[list[Fraction]]:
    n = len(a)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(red) < n:
        raise DimensionError("matrix is singular")
    return [row[n:] for row in red]


def integer_inverse(a) -> Matrix:
    inv = inverse(a)
    if any(x.denominator != 1 for row in inv for x in row):
        raise DimensionError("inverse is not integral")
    return as_matrix([[int(x) for x in row] for row in inv])


def smith_diagonal(a) -> list[int]:
    """Invariant factors (nonnegative, each dividing the next) of an integer matrix.

    Zero invariant factors are reported for rank deficiency.
    """
    m = [list(r) for r in a]
    rows = len(m)
    cols = len(m[0]) if m else 0
    diag = []
    for s in range(min(rows, cols)):
        while True:
            entries = [(abs(m[i][j]), i, j) for i in range(s, rows) for j in range(s, cols) if m[i][j]]
            if not entries:
                return sorted(diag) + [0] * (min(rows, cols) - len(diag))
            _, pi, pj = min(entries)
            m[s], m[pi] = m[pi], m[s]
            for row in m:
                row[s], row[pj] = row[pj], row[s]
            p = m[s][s]
            clean = True
            for i in range(s + 1, rows):
                q = m[i][s] // p
                if q:
                    m[i] = [x - q * y for x, y in zip(m[i], m[s])]
                if m[i][s]:
                    clean = False
            for j in range(s + 1, cols):
                q = m[s][j] // p
                if q:
                    for row in m:
                        row[j] -= q * row[s]
                if m[s][j]:
                    clean = False
            if not clean:
                continue
            # pivot must divide the remaining block
            bad = next(((i, j) for i in range(s + 1, rows) for j in range(s + 1, cols) if m[i][j] % p), None)
            if bad is None:
                break
            m[s] = [x + y for x, y in zip(m[s], m[bad[0]])]
        diag.append(abs(m[s][s]))
    return sorted(diag)


def column_reduce_row(f: Sequence[int]) -> tuple[int, Matrix]:
    """Unimodular ``U`` with ``f U = (g, 0, ..., 0)`` and ``g = gcd(f) >= 0``.

    Uses the smallest nonzero entry as pivot so that already-sparse rows map
    to permutations.
    """
    n = len(f)
    row = list(f)
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(dst, src, q):
        row[dst] -= q * row[src]
        for r in u:
            r[dst] -= q * r[src]

    def swap(a, b):
        row[a], row[b] = row[b], row[a]
        for r in u:
            r[a], r[b] = r[b], r[a]

    while True:
        nz = [j for j in range(n) if row[j]]
        if not nz:
            return 0, as_matrix(u)
        p = min(nz, key=lambda j: (abs(row[j]), j))
        if len(nz) == 1:
            break
        for j in nz:
            if j != p:
                colop(j, p, row[j] // row[p])
    swap(0, p)
    if row[0] < 0:
        row[0] = -row[0]
        for r in u:
            r[0] = -r[0]
    return row[0], as_matrix(u)


def complete_to_unimodular(c: Sequence[int]) -> Matrix:
    """Unimodular integer matrix whose first column is the primitive vector ``c``."""
    g, u = column_reduce_row(c)
    if g != 1:
        raise DimensionError("vector is not primitive")
    # c^T U = e_1^T, so U^T c' ... invert: (U^{-1})^T has first column c.
    return as_matrix(transpose(integer_inverse(u)))


def primitive(v: Sequence[int]) -> Vector:
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        return tuple(v)
    return tuple(x // g for x in v)


def clear_denominators(v: Sequence[Fraction]) -> Vector:
    """Smallest positive integer multiple of a rational vector, made primitive."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    return primitive([int(Fraction(x) * den) for x in v])
