"""Primes, prime-power sums and elementary multiplicative functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import CapacityError

# sieve above this bound runs in segments of SEGMENT_SIZE
SEGMENT_THRESHOLD = 10**7
SEGMENT_SIZE = 2**22
MAX_SIEVE_LIMIT = 2 * 10**9


def _simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    is_prime[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if is_prime[p]:
            is_prime[p * p :: 2 * p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def iter_prime_segments(limit: int, segment_size: int = SEGMENT_SIZE) -> Iterator[np.ndarray]:
    """Yield ascending arrays of the primes <= limit, one segment at a time."""
    if limit < 2:
        return
    base = _simple_sieve(math.isqrt(limit))
    if limit <= segment_size:
        yield _simple_sieve(limit)
        return
    yield base
    low = int(base[-1]) + 1 if len(base) else 2
    while low <= limit:
        high = min(low + segment_size, limit + 1)
        mask = np.ones(high - low, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, -(-low // p) * p)
            mask[start - low :: p] = False
        yield np.flatnonzero(mask).astype(np.int64) + low
        low = high


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return (int(p) for p in self.primes)

    def tolist(self) -> list[int]:
        return [int(p) for p in self.primes]

    def upto(self, x: float) -> np.ndarray:
        """Primes <= x (x may be fractional)."""
        return self.primes[: int(np.searchsorted(self.primes, math.floor(x), side="right"))]


def sieve_primes(limit: int) -> PrimeTable:
    """All primes up to ``limit``; segmented above ``SEGMENT_THRESHOLD``."""
    limit = int(limit)
    if limit < 0:
        raise ValueError("limit must be non-negative")
    if limit > MAX_SIEVE_LIMIT:
        raise CapacityError(f"sieve limit {limit} exceeds capacity {MAX_SIEVE_LIMIT}")
    if limit <= SEGMENT_THRESHOLD:
        primes = _simple_sieve(limit)
    else:
        primes = np.concatenate(list(iter_prime_segments(limit)))
    primes.setflags(write=False)
    return PrimeTable(limit, primes)


_TABLE_CACHE: dict[int, PrimeTable] = {}


def primes_upto(x: float) -> np.ndarray:
    """Cached prime array for repeated small queries."""
    n = max(int(math.floor(x)), 0)
    for lim, table in _TABLE_CACHE.items():
        if lim >= n:
            return table.upto(n)
    lim = max(n, 1 << 16)
    table = sieve_primes(lim)
    _TABLE_CACHE.clear()
    _TABLE_CACHE[lim] = table
    return table.upto(n)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation as ((p, e), ...) by trial division."""
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in factorize(n)]


def omega(n: int) -> int:
    return len(factorize(n))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n))


def moebius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def sigma(n: int, k: int) -> int:
    """Sum of k-th powers of the divisors of n."""
    return sum(d**k for d in divisors(n))


def sigma_table(k: int, n_max: int) -> list[int]:
    """[sigma_k(0)=0, sigma_k(1), ..., sigma_k(n_max)] by a divisor sieve."""
    out = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        dk = d**k
        for m in range(d, n_max + 1, d):
            out[m] += dk
    return out


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a / n) for n > 0."""
    if n <= 0:
        raise ValueError("n must be positive")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _coprime_primes(M: int, X: float) -> np.ndarray:
    ps = primes_upto(X)
    if M == 1 or len(ps) == 0:
        return ps
    keep = np.ones(len(ps), dtype=bool)
    for q in prime_divisors(M):
        keep &= ps != q
    return ps[keep]


def prime_power_sum(M: int, ell: float, X: float) -> float:
    """Sum of p**ell over primes p <= X not dividing M (float, exactly rounded sum)."""
    if M < 1:
        raise ValueError("M must be positive")
    ps = _coprime_primes(M, X)
    if len(ps) == 0:
        return 0.0
    return math.fsum(np.power(ps.astype(np.float64), float(ell)))


def prime_power_sum_exact(M: int, ell: int, X: float) -> int:
    """Integer-exact variant of :func:`prime_power_sum` for integer ell >= 0."""
    if ell < 0 or int(ell) != ell:
        raise ValueError("exact variant needs a non-negative integer exponent")
    ell = int(ell)
    return sum(int(p) ** ell for p in _coprime_primes(M, X))


def coprime_primes(M: int, X: float) -> list[int]:
    """Primes <= X not dividing M, ascending."""
    return [int(p) for p in _coprime_primes(M, X)]
