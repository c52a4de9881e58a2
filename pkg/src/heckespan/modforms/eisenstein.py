"""Eisenstein newforms E_k^{psi,phi} and generalised Bernoulli numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ..arith import divisors, sigma_table
from ..characters import Cyclo, DirichletCharacter, simplify
from ..errors import UnsupportedInput
from .qexp import QExpansion, check_weight


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = +1/2 (so that B_n = B_n(1))."""
    if n == 0:
        return Fraction(1)
    # sum_{j<=n} C(n+1, j) B_j = 0 with the B_1 = -1/2 convention, then flip B_1
    acc = Fraction(0)
    for j in range(n):
        bj = bernoulli(j) if j != 1 else Fraction(-1, 2)
        acc += math.comb(n + 1, j) * bj
    b = -acc / (n + 1)
    return -b if n == 1 else b


def bernoulli_poly(n: int, x: Fraction) -> Fraction:
    # B_n(x) = sum_j C(n, j) B_j x^(n-j), with B_1 = -1/2 here
    total = Fraction(0)
    for j in range(n + 1):
        bj = bernoulli(j) if j != 1 else Fraction(-1, 2)
        total += math.comb(n, j) * bj * x ** (n - j)
    return total


@lru_cache(maxsize=None)
def _gen_bernoulli_cached(modulus: int, exponents: tuple, k: int):
    phi = DirichletCharacter(modulus, exponents)
    f = phi.modulus
    if f == 1:
        return bernoulli(k)
    n = phi.order
    total = Cyclo(n, [0])
    for a in range(1, f + 1):
        t = phi.angle(a)
        if t is None:
            continue
        total = total + Cyclo.root(n, int(t * n)) * bernoulli_poly(k, Fraction(a, f))
    return simplify(total * f ** (k - 1))


def generalized_bernoulli(phi: DirichletCharacter, k: int):
    """B_{k,phi} for the primitive character attached to phi (Fraction or Cyclo)."""
    if k < 1:
        raise UnsupportedInput("k must be positive")
    prim = phi.primitive()
    return _gen_bernoulli_cached(prim.modulus, prim.exponents, k)


def l_value_negative(phi: DirichletCharacter, k: int):
    """L(phi, 1 - k) = -B_{k,phi} / k."""
    return simplify(-generalized_bernoulli(phi, k) * Fraction(1, k))


def _character_value(chi: DirichletCharacter, a: int, n: int):
    t = chi.angle(a)
    if t is None:
        return None
    return int(t * n) % n


def eisenstein_sigma(psi: DirichletCharacter, phi: DirichletCharacter, k: int, n: int):
    """sum over ab = n of psi(a) phi(b) b^(k-1); a Fraction when rational, else Cyclo."""
    if n < 1:
        raise ValueError("n must be positive")
    if psi.is_real and phi.is_real:
        return Fraction(
            sum(psi.real_value(n // b) * phi.real_value(b) * b ** (k - 1) for b in divisors(n))
        )
    order = math.lcm(psi.order, phi.order)
    coeffs = [0] * order
    for b in divisors(n):
        x, y = _character_value(psi, n // b, order), _character_value(phi, b, order)
        if x is None or y is None:
            continue
        coeffs[(x + y) % order] += b ** (k - 1)
    return simplify(Cyclo(order, coeffs))


@dataclass(frozen=True)
class EisensteinParams:
    psi: DirichletCharacter
    phi: DirichletCharacter
    k: int
    trivial_nebentypus: bool = True

    def __post_init__(self):
        check_weight(self.k)
        if not (self.psi.is_primitive and self.phi.is_primitive):
            raise UnsupportedInput("psi and phi must be primitive")
        if self.trivial_nebentypus:
            q = self.psi.modulus * self.phi.modulus
            if not (self.psi.extend(q) * self.phi.extend(q)).is_principal:
                raise UnsupportedInput("psi*phi is not principal")
        if (self.psi.parity() + self.phi.parity() + self.k) % 2:
            raise UnsupportedInput("parity of psi*phi must match the weight")

    @property
    def level(self) -> int:
        return self.psi.modulus * self.phi.modulus

    def label(self) -> str:
        return f"E{self.k}[{self.psi.label()},{self.phi.label()}]"


def trivial_params(k: int) -> EisensteinParams:
    one = DirichletCharacter.principal(1)
    return EisensteinParams(one, one, k)


def eisenstein_newform(params: EisensteinParams, prec: int) -> QExpansion:
    """q-expansion of E_k^{psi,phi} through q^prec."""
    k, psi, phi = params.k, params.psi, params.phi
    const = Fraction(0)
    if psi.conductor == 1:
        const = simplify(l_value_negative(phi, k) * Fraction(1, 2))
    if psi.conductor == 1 and phi.conductor == 1:
        sig = sigma_table(k - 1, prec)
        coeffs = [const] + [Fraction(s) for s in sig[1:]]
    else:
        coeffs = [const] + [eisenstein_sigma(psi, phi, k, n) for n in range(1, prec + 1)]
    return QExpansion(k, params.level, tuple(coeffs), params.label())


def level_one_eisenstein_int(k: int, prec: int) -> list[int]:
    """E_k normalised with constant term 1 (integral for k = 4, 6): 1 - (2k/B_k) sum sigma_{k-1}(n) q^n."""
    c = Fraction(-2 * k) / bernoulli(k)
    sig = sigma_table(k - 1, prec)
    out = [Fraction(1)] + [c * s for s in sig[1:]]
    if any(x.denominator != 1 for x in out):
        raise ValueError(f"E_{k} is not integral with constant term 1")
    return [int(x) for x in out]
