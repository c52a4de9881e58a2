"""Level-one forms: the Miller basis of M_k(SL2(Z))."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from ..errors import InsufficientPrecision
from .eisenstein import level_one_eisenstein_int
from .qexp import QExpansion, check_weight, from_ints
from .series import mul_int, pow_int


def dim_level_one(k: int) -> int:
    check_weight(k)
    return k // 12 + (0 if k % 12 == 2 else 1)


def _monomial(a: int, b: int, prec: int) -> list[int]:
    e4 = level_one_eisenstein_int(4, prec)
    e6 = level_one_eisenstein_int(6, prec)
    return mul_int(pow_int(e4, a, prec), pow_int(e6, b, prec), prec)


@lru_cache(maxsize=64)
def _miller_ints(k: int, prec: int) -> tuple[tuple[int, ...], ...]:
    d = dim_level_one(k)
    work_prec = max(prec, d - 1)
    monos = [_monomial(a, (k - 4 * a) // 6, work_prec) for a in range(k // 4 + 1) if (k - 4 * a) % 6 == 0]
    assert len(monos) == d
    # Gauss-Jordan on the leading d x d block, applied as a change of basis
    rows = [[Fraction(x) for x in m[:d]] for m in monos]
    combo = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for col in range(d):
        piv = next(r for r in range(col, d) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        combo[col], combo[piv] = combo[piv], combo[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        combo[col] = [x * inv for x in combo[col]]
        for r in range(d):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
                combo[r] = [x - f * y for x, y in zip(combo[r], combo[col])]
    out = []
    for j in range(d):
        den = 1
        for c in combo[j]:
            den = den * c.denominator // _gcd(den, c.denominator)
        ints = [int(c * den) for c in combo[j]]
        acc = [0] * (work_prec + 1)
        for c, m in zip(ints, monos):
            if c:
                acc = [x + c * y for x, y in zip(acc, m)]
        if any(x % den for x in acc):
            raise ArithmeticError(f"Miller basis element {j} of weight {k} is not integral")
        out.append(tuple(x // den for x in acc[: prec + 1]))
    return tuple(out)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def miller_basis(k: int, prec: int) -> list[QExpansion]:
    """Basis f_0..f_{d-1} of M_k(SL2(Z)) with a_i(f_j) = delta_ij for i, j < d."""
    check_weight(k)
    d = dim_level_one(k)
    if prec < d - 1:
        raise InsufficientPrecision(f"precision {prec} < dim - 1 = {d - 1}")
    return [from_ints(k, 1, c, f"miller_{k}_{j}") for j, c in enumerate(_miller_ints(k, prec))]


def delta_coefficients(prec: int) -> list[int]:
    """tau(0..prec) with tau(0) = 0, from the weight-12 Miller basis."""
    return list(_miller_ints(12, prec)[1])
