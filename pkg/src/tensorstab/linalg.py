"""Small exact linear algebra over the rationals (row reduction based)."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

Vector = tuple[Fraction, ...]
Matrix = list[list[Fraction]]


def to_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = to_matrix(rows)
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][col]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Basis of ``{x : rows @ x = 0}``; one vector per free column."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for i in range(ncols)) for j in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def det(rows: Sequence[Sequence]) -> Fraction:
    m = to_matrix(rows)
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("determinant of a non-square matrix")
    result = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if m[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            result = -result
        lead = m[col][col]
        result *= lead
        for i in range(col + 1, n):
            if m[i][col] != 0:
                f = m[i][col] / lead
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return result


def inverse(rows: Sequence[Sequence]) -> Matrix:
    m = to_matrix(rows)
    n = len(m)
    aug = [row + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    red, pivots = rref(aug, n)
    if pivots != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*a)]


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to a primitive integer vector, keeping its direction."""
    fr = [Fraction(x) for x in vec]
    den = math.lcm(*(x.denominator for x in fr)) if fr else 1
    ints = [int(x * den) for x in fr]
    g = math.gcd(*ints) if ints else 0
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def canonical(vec: Sequence) -> tuple[int, ...]:
    """Primitive integer vector with first nonzero entry positive."""
    p = primitive(vec)
    lead = next((x for x in p if x != 0), 0)
    return tuple(-x for x in p) if lead < 0 else p


def span_basis(vectors: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Row-reduced basis of the span, each vector made canonical."""
    if not vectors:
        return []
    red, _ = rref(vectors, ncols)
    return [tuple(Fraction(x) for x in canonical(row)) for row in red]


def in_span(vectors: Sequence[Sequence], v: Sequence) -> bool:
    return rank(list(vectors) + [list(v)]) == rank(vectors) if vectors else all(x == 0 for x in v)


def unit(n: int, i: int) -> Vector:
    return tuple(Fraction(int(j == i)) for j in range(n))
