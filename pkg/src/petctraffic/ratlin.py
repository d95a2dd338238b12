"""Exact rational linear algebra on small dense matrices.

Matrices are tuples of tuples of Fraction, vectors are tuples of Fraction.
Everything is immutable and hashable, so values can be shared freely.
These operations are the single source of truth for every exact
membership test in the package; no tolerance is involved anywhere here.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

RatMatrix = tuple[tuple[Fraction, ...], ...]
RatVector = tuple[Fraction, ...]


def rat(x) -> Fraction:
    """Convert x to an exact Fraction (floats map to their exact dyadic value)."""
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError("non-finite entry")
        return Fraction(x)
    return Fraction(x)


def vec(entries: Iterable) -> RatVector:
    return tuple(rat(e) for e in entries)


def mat(rows: Iterable[Iterable]) -> RatMatrix:
    m = tuple(tuple(rat(e) for e in row) for row in rows)
    if m and any(len(row) != len(m[0]) for row in m):
        raise ValueError("ragged matrix")
    return m


def identity(n: int) -> RatMatrix:
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def transpose(a: RatMatrix) -> RatMatrix:
    return tuple(zip(*a))


def mat_mul(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    if len(a[0]) != len(b):
        raise ValueError("dimension mismatch")
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a: RatMatrix, x: RatVector) -> RatVector:
    if len(a[0]) != len(x):
        raise ValueError("dimension mismatch")
    return tuple(sum(e * v for e, v in zip(row, x)) for row in a)


def quad_form(f: RatMatrix, x: RatVector) -> Fraction:
    """x' F x, exactly."""
    return sum(x[i] * sum(f[i][j] * x[j] for j in range(len(x))) for i in range(len(x)))


def congruence(f: RatMatrix, a: RatMatrix) -> RatMatrix:
    """A' F A, exactly."""
    return mat_mul(transpose(a), mat_mul(f, a))


def symmetrize(f: RatMatrix) -> RatMatrix:
    half = Fraction(1, 2)
    return tuple(
        tuple((f[i][j] + f[j][i]) * half for j in range(len(f)))
        for i in range(len(f))
    )


def is_symmetric(f: RatMatrix) -> bool:
    n = len(f)
    return all(f[i][j] == f[j][i] for i in range(n) for j in range(n))


def scale(f: RatMatrix, c) -> RatMatrix:
    c = rat(c)
    return tuple(tuple(c * e for e in row) for row in f)


def from_float_matrix(m) -> RatMatrix:
    """Freeze a float array into the exact rationals its doubles represent."""
    return mat(m)


def to_float_matrix(a: RatMatrix):
    import numpy as np

    return np.array([[float(e) for e in row] for row in a], dtype=float)
