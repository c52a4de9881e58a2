import math

import pytest
from hypothesis import given, settings, strategies as st

from heckespan import arith
from heckespan.errors import CapacityError

from conftest import trial_division_primes


@pytest.mark.parametrize("limit,expected", [(10, [2, 3, 5, 7]), (1, []), (0, [])])
def test_sieve_small(limit, expected):
    assert arith.sieve_primes(limit).tolist() == expected


def test_sieve_30():
    t = arith.sieve_primes(30).tolist()
    assert len(t) == 10 and t[-1] == 29


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3000))
def test_sieve_matches_trial_division(n):
    assert arith.sieve_primes(n).tolist() == trial_division_primes(n)


def test_segmented_sieve_agrees_with_simple():
    # pi(2*10^6) = 148933
    seg = arith.sieve_primes(2 * 10**6)
    assert len(seg) == 148933
    assert seg.tolist()[:5] == [2, 3, 5, 7, 11]
    assert seg.upto(10**6)[-1] == 999983


def test_sieve_capacity():
    with pytest.raises(CapacityError):
        arith.sieve_primes(arith.MAX_SIEVE_LIMIT + 1)


@pytest.mark.parametrize("M,ell,X,expected", [(1, 0, 10, 4), (6, 0, 10, 2), (1, 1, 10, 17), (1, 0, 1.5, 0)])
def test_prime_power_sum(M, ell, X, expected):
    assert arith.prime_power_sum(M, ell, X) == pytest.approx(expected)
    assert arith.prime_power_sum_exact(M, ell, X) == expected


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60), st.integers(0, 3), st.floats(0, 500))
def test_prime_power_sum_exact_oracle(M, ell, X):
    expected = sum(p**ell for p in trial_division_primes(int(X)) if M % p)
    assert arith.prime_power_sum_exact(M, ell, X) == expected


def test_divisors_and_omega():
    assert arith.divisors(1) == [1]
    assert arith.divisors(30) == [1, 2, 3, 5, 6, 10, 15, 30]
    assert arith.omega(30) == 3
    assert arith.divisors(17) == [1, 17] and arith.omega(17) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10**5))
def test_factorize_roundtrip(n):
    fac = arith.factorize(n)
    assert math.prod(p**e for p, e in fac) == n
    assert all(arith.is_prime(p) for p, _ in fac)
    if n < 3000:
        assert arith.divisors(n) == [d for d in range(1, n + 1) if n % d == 0]
    assert arith.is_squarefree(n) == all(e == 1 for _, e in fac)


def test_multiplicative_functions():
    assert [arith.moebius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    assert [arith.euler_phi(n) for n in (1, 5, 12, 30)] == [1, 4, 4, 8]
    assert arith.sigma(6, 3) == 1 + 8 + 27 + 216


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_kronecker_is_legendre_at_odd_primes(p):
    for a in range(1, 3 * p):
        euler = pow(a, (p - 1) // 2, p)
        legendre = 0 if a % p == 0 else (1 if euler == 1 else -1)
        assert arith.kronecker_symbol(a, p) == legendre


def test_coprime_primes():
    assert arith.coprime_primes(6, 20) == [5, 7, 11, 13, 17, 19]
