"""Dimension formulas for M_k(Gamma0(N)), N squarefree, k >= 4 even."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from ..arith import divisors, factorize, is_squarefree, kronecker_symbol
from ..errors import UnsupportedInput
from .qexp import check_weight


def _check(k: int, N: int) -> None:
    check_weight(k)
    if N < 1 or not is_squarefree(N):
        raise UnsupportedInput(f"level {N} unsupported: need a squarefree level")


def gamma0_index(N: int) -> int:
    """[SL2(Z) : Gamma0(N)] = N prod_{p | N} (1 + 1/p)."""
    m = N
    for p, _ in factorize(N) if N > 1 else ():
        m = m // p * (p + 1)
    return m


def elliptic_points(N: int) -> tuple[int, int]:
    """(nu_2, nu_3) for squarefree N."""
    nu2 = nu3 = 1
    for p, _ in factorize(N) if N > 1 else ():
        nu2 *= 1 + kronecker_symbol(-4, p)
        nu3 *= 1 + kronecker_symbol(-3, p)
    return nu2, nu3


def cusp_count(N: int) -> int:
    return len(divisors(N))  # squarefree: one cusp per divisor


def genus(N: int) -> int:
    nu2, nu3 = elliptic_points(N)
    g = 1 + Fraction(gamma0_index(N), 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusp_count(N), 2)
    assert g.denominator == 1
    return int(g)


@lru_cache(maxsize=None)
def dim_cusp(k: int, N: int) -> int:
    _check(k, N)
    nu2, nu3 = elliptic_points(N)
    c = cusp_count(N)
    return (k - 1) * (genus(N) - 1) + (k // 2 - 1) * c + nu2 * (k // 4) + nu3 * (k // 3)


@lru_cache(maxsize=None)
def dim_eis(k: int, N: int) -> int:
    _check(k, N)
    return cusp_count(N)


def dim_modular(k: int, N: int) -> int:
    return dim_cusp(k, N) + dim_eis(k, N)


def _new_from_total(total, k: int, N: int) -> int:
    # total(M) = sum_{d | M} sigma_0(M/d) * new(d)
    new = total(k, N)
    for d in divisors(N):
        if d != N:
            new -= len(divisors(N // d)) * _new_from_total(total, k, d)
    return new


@lru_cache(maxsize=None)
def dim_cusp_new(k: int, N: int) -> int:
    _check(k, N)
    return _new_from_total(dim_cusp, k, N)


@lru_cache(maxsize=None)
def dim_eis_new(k: int, N: int) -> int:
    _check(k, N)
    return _new_from_total(dim_eis, k, N)


def s_and_eps(k: int, M: int) -> tuple[int, int]:
    """(s_M, eps_M): new cusp and new Eisenstein dimensions summed over d | M."""
    return (
        sum(dim_cusp_new(k, d) for d in divisors(M)),
        sum(dim_eis_new(k, d) for d in divisors(M)),
    )
