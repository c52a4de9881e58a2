"""Exact linear algebra over Z and Q: Bareiss rank, RREF, nullspaces, mod-p selection."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

MODP = (1 << 61) - 1  # Mersenne prime used for fast independence screening


def integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Scale each row by the lcm of its denominators."""
    out = []
    for row in rows:
        den = 1
        for x in row:
            q = Fraction(x).denominator
            den = den * q // math.gcd(den, q)
        out.append([int(Fraction(x) * den) for x in row])
    return out


def bareiss_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination; rational rows are scaled first."""
    if any(isinstance(x, Fraction) for r in rows for x in r):
        rows = integer_rows(rows)
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return 0
    n_cols = len(a[0])
    rank, prev = 0, 1
    for col in range(n_cols):
        piv = next((r for r in range(rank, len(a)) if a[r][col]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, len(a)):
            x = a[r][col]
            a[r] = [(p * a[r][j] - x * a[rank][j]) // prev for j in range(n_cols)]
        prev = p
        rank += 1
        if rank == len(a):
            break
    return rank


def rank_rational(rows: Sequence[Sequence]) -> int:
    return bareiss_rank(integer_rows(rows))


def rank_trace(rows: Sequence[Sequence]) -> list[int]:
    """Rank of the first i rows, for i = 1..len(rows); incremental echelon over Q."""
    basis: dict[int, list[Fraction]] = {}  # pivot column -> reduced row
    trace = []
    for row in rows:
        v = [Fraction(x) for x in row]
        for col, b in basis.items():
            if v[col]:
                c = v[col]
                v = [x - c * y for x, y in zip(v, b)]
        piv = next((j for j, x in enumerate(v) if x), None)
        if piv is not None:
            inv = 1 / v[piv]
            v = [x * inv for x in v]
            for col, b in basis.items():
                if b[piv]:
                    c = b[piv]
                    basis[col] = [x - c * y for x, y in zip(b, v)]
            basis[piv] = v
        trace.append(len(basis))
    return trace


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    a = [[Fraction(x) for x in r] for r in rows]
    if not a:
        return [], []
    n_cols = len(a[0])
    pivots = []
    r = 0
    for col in range(n_cols):
        piv = next((i for i in range(r, len(a)) if a[i][col]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][col]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][col]:
                c = a[i][col]
                a[i] = [x - c * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def nullspace(rows: Sequence[Sequence], n_cols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : A x = 0} over Q."""
    if n_cols is None:
        n_cols = len(rows[0])
    red, pivots = rref(rows) if rows else ([], [])
    free = [j for j in range(n_cols) if j not in set(pivots)]
    basis = []
    for f in free:
        x = [Fraction(0)] * n_cols
        x[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            x[pc] = -row[f]
        basis.append(x)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Unique solution of A x = b over Q; raises ValueError if inconsistent or not unique."""
    n = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    if n in pivots:
        raise ValueError("inconsistent system")
    if len(pivots) < n:
        raise ValueError("solution not unique")
    x = [Fraction(0)] * n
    for row, pc in zip(red, pivots):
        x[pc] = row[n]
    return x


def independent_columns_modp(columns: Sequence[Sequence[int]], target: int | None = None, p: int = MODP) -> list[int]:
    """Greedy indices of columns independent mod p (hence independent over Q)."""
    basis: dict[int, list[int]] = {}
    chosen = []
    for idx, col in enumerate(columns):
        v = [int(x) % p for x in col]
        for piv, b in basis.items():
            if v[piv]:
                c = v[piv]
                v = [(x - c * y) % p for x, y in zip(v, b)]
        piv = next((j for j, x in enumerate(v) if x), None)
        if piv is None:
            continue
        inv = pow(v[piv], -1, p)
        basis[piv] = [x * inv % p for x in v]
        chosen.append(idx)
        if target is not None and len(chosen) == target:
            break
    return chosen


def mat_mul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def determinant(rows: Sequence[Sequence]) -> Fraction:
    """Exact determinant over Q (fraction-free on the scaled integer matrix)."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    ints = []
    for row in rows:
        den = 1
        for x in row:
            q = Fraction(x).denominator
            den = den * q // math.gcd(den, q)
        scale /= den
        ints.append([int(Fraction(x) * den) for x in row])
    return scale * bareiss_det(ints)


def bareiss_det(a: Sequence[Sequence[int]]) -> int:
    a = [list(r) for r in a]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        piv = next((r for r in range(k, n) if a[r][k]), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
