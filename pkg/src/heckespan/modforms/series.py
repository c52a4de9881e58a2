"""Truncated power series over Z and Q.

Integer products use Kronecker substitution: both series are packed into
one big integer, multiplied by GMP, and unpacked with signed digits.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import gmpy2


def _pack(coeffs: Sequence[int], bits: int):
    # build R = sum c_i 2^(bits*i) through a byte buffer of non-negative digits
    if not coeffs:
        return gmpy2.mpz(0)
    neg = [-c if c < 0 else 0 for c in coeffs]
    pos = [c if c > 0 else 0 for c in coeffs]
    nbytes = bits // 8

    def to_int(vals):
        buf = b"".join(int(v).to_bytes(nbytes, "little") for v in vals)
        return gmpy2.mpz(int.from_bytes(buf, "little"))

    return to_int(pos) - to_int(neg)


def _unpack(value, bits: int, count: int) -> list[int]:
    nbytes = bits // 8
    half = 1 << (bits - 1)
    # bias every digit by 2^(bits-1) so the packed number has non-negative digits
    bias_digit = half.to_bytes(nbytes, "little")
    bias = int.from_bytes(bias_digit * count, "little")
    shifted = int(value) + bias
    if shifted < 0:
        raise OverflowError("Kronecker slot width too small")
    raw = shifted.to_bytes(nbytes * count + 1, "little")
    if raw[nbytes * count] != 0:
        raise OverflowError("Kronecker slot width too small")
    return [
        int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - half
        for i in range(count)
    ]


def mul_int(a: Sequence[int], b: Sequence[int], prec: int) -> list[int]:
    """Coefficients 0..prec of the product of two integer series."""
    a = list(a[: prec + 1])
    b = list(b[: prec + 1])
    if not a or not b:
        return [0] * (prec + 1)
    if min(len(a), len(b)) <= 16:
        out = [0] * (prec + 1)
        for i, x in enumerate(a):
            if x:
                for j in range(min(len(b), prec + 1 - i)):
                    out[i + j] += x * b[j]
        return out
    ma = max(abs(x) for x in a) or 1
    mb = max(abs(x) for x in b) or 1
    bound = ma * mb * min(len(a), len(b))
    bits = bound.bit_length() + 2
    bits = -(-bits // 8) * 8
    prod = _pack(a, bits) * _pack(b, bits)
    count = len(a) + len(b) - 1
    out = _unpack(prod, bits, count)
    out = out[: prec + 1]
    return out + [0] * (prec + 1 - len(out))


def pow_int(a: Sequence[int], e: int, prec: int) -> list[int]:
    result = [1] + [0] * prec
    base = list(a[: prec + 1])
    while e:
        if e & 1:
            result = mul_int(result, base, prec)
        e >>= 1
        if e:
            base = mul_int(base, base, prec)
    return result


def common_denominator(coeffs: Sequence) -> int:
    d = 1
    for c in coeffs:
        q = Fraction(c).denominator
        d = d * q // math.gcd(d, q)
    return d


def mul_rational(a: Sequence, b: Sequence, prec: int) -> list[Fraction]:
    da, db = common_denominator(a), common_denominator(b)
    ia = [int(Fraction(x) * da) for x in a]
    ib = [int(Fraction(x) * db) for x in b]
    d = da * db
    return [Fraction(c, d) for c in mul_int(ia, ib, prec)]


def eta_product_series(exponents: dict[int, int], prec: int) -> tuple[int, list[int]]:
    """prod_delta eta(delta z)^r_delta as (q-order numerator over 24, coefficients).

    Returns (shift24, coeffs) where the form equals q^(shift24/24) * sum coeffs[n] q^n,
    coefficients computed through index ``prec``.
    """
    shift24 = sum(d * r for d, r in exponents.items())
    result = [1] + [0] * prec
    for d, r in exponents.items():
        if r == 0:
            continue
        base = euler_product_series(d, prec)
        if r < 0:
            base = inverse_int(base, prec)
        result = mul_int(result, pow_int(base, abs(r), prec), prec)
    return shift24, result


def euler_product_series(d: int, prec: int) -> list[int]:
    """prod_{n>=1} (1 - q^(d n)) via the pentagonal number theorem."""
    out = [0] * (prec + 1)
    k = 0
    while True:
        done = True
        for kk in ((k,) if k == 0 else (k, -k)):
            e = d * (kk * (3 * kk - 1) // 2)
            if e <= prec:
                out[e] += -1 if kk % 2 else 1
                done = False
        if done and k > 0:
            break
        k += 1
    return out


def inverse_int(a: Sequence[int], prec: int) -> list[int]:
    """Inverse of an integer series with constant term +-1."""
    if a[0] not in (1, -1):
        raise ValueError("constant term must be a unit")
    # Newton iteration doubling the precision
    inv = [a[0]]
    n = 1
    while n <= prec:
        n = min(2 * n, prec + 1)
        t = mul_int(a, inv, n - 1)
        t = [-x for x in t]
        t[0] += 2
        inv = mul_int(inv, t, n - 1)
    return inv[: prec + 1] + [0] * max(0, prec + 1 - len(inv))
