"""Dirichlet characters with exact root-of-unity values.

A character mod q is stored as an exponent vector on fixed generators of
(Z/q)^x; chi(g_i) = exp(2 pi i e_i / ord(g_i)).  Values are returned as
``Fraction`` angles t in [0, 1) (chi(a) = exp(2 pi i t)), as exact
:class:`Cyclo` numbers, or as complex embeddings.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .arith import divisors, factorize


# ---------------------------------------------------------------------------
# cyclotomic numbers


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients (low degree first) of the n-th cyclotomic polynomial."""
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in divisors(n):
        if d == n:
            continue
        num = _poly_divexact(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _poly_divexact(a: list[int], b: list[int]) -> list[int]:
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = a[i + len(b) - 1] // b[-1]
        out[i] = c
        for j, bj in enumerate(b):
            a[i + j] -= c * bj
    assert not any(a), "inexact polynomial division"
    return out


class Cyclo:
    """Element of Q(zeta_n) in the power basis modulo the n-th cyclotomic polynomial."""

    __slots__ = ("n", "c")

    def __init__(self, n: int, coeffs=()):
        self.n = n
        phi = cyclotomic_poly(n)
        deg = len(phi) - 1
        c = [Fraction(x) for x in coeffs]
        # reduce modulo the monic cyclotomic polynomial
        for i in range(len(c) - 1, deg - 1, -1):
            top = c[i]
            if top:
                for j in range(deg):
                    c[i - deg + j] -= top * phi[j]
            c[i] = Fraction(0)
        c = c[:deg] + [Fraction(0)] * max(0, deg - len(c))
        self.c = tuple(c)

    @classmethod
    def root(cls, n: int, j: int) -> "Cyclo":
        j %= n
        coeffs = [0] * (j + 1)
        coeffs[j] = 1
        return cls(n, coeffs)

    @classmethod
    def rational(cls, n: int, x) -> "Cyclo":
        return cls(n, [x])

    def _lift(self, other) -> "Cyclo":
        if isinstance(other, Cyclo):
            if other.n == self.n:
                return other
            n = math.lcm(self.n, other.n)
            raise ValueError(f"mixed cyclotomic orders {self.n}, {other.n}; lift to {n} first")
        return Cyclo(self.n, [other])

    def lift_to(self, n: int) -> "Cyclo":
        """Same number viewed in Q(zeta_n), n a multiple of self.n."""
        if n % self.n:
            raise ValueError("target order must be a multiple")
        step = n // self.n
        coeffs = [Fraction(0)] * (step * len(self.c) + 1)
        for j, x in enumerate(self.c):
            coeffs[j * step] = x
        return Cyclo(n, coeffs)

    def __add__(self, other):
        o = self._lift(other)
        return Cyclo(self.n, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.n, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Cyclo):
            return Cyclo(self.n, [a * other for a in self.c])
        o = self._lift(other)
        prod = [Fraction(0)] * (len(self.c) + len(o.c))
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    prod[i + j] += a * b
        return Cyclo(self.n, prod)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Cyclo):
            if other.n != self.n:
                n = math.lcm(self.n, other.n)
                return self.lift_to(n).c == other.lift_to(n).c
            return self.c == other.c
        try:
            return self.c == Cyclo(self.n, [other]).c
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.n, self.c))

    def is_rational(self) -> bool:
        return not any(self.c[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("cyclotomic number is not rational")
        return self.c[0]

    def conjugate(self) -> "Cyclo":
        coeffs = [Fraction(0)] * self.n
        for j, x in enumerate(self.c):
            coeffs[(-j) % self.n] += x
        return Cyclo(self.n, coeffs)

    def __complex__(self):
        z = cmath.exp(2j * cmath.pi / self.n)
        return complex(sum(float(x) * z**j for j, x in enumerate(self.c)))

    def __repr__(self):
        return f"Cyclo({self.n}, {[str(x) for x in self.c]})"


def simplify(x):
    """Cyclo -> Fraction when rational; anything else unchanged."""
    if isinstance(x, Cyclo) and x.is_rational():
        return x.to_rational()
    return x


# ---------------------------------------------------------------------------
# group structure of (Z/q)^x


def _primitive_root_prime_power(p: int, e: int) -> int:
    phi = p - 1
    fac = [r for r, _ in factorize(phi)] if phi > 1 else []
    for g in range(2, p + 1):
        if all(pow(g, phi // r, p) != 1 for r in fac):
            break
    else:
        g = 1
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _crt_lift(residue: int, modulus: int, q: int) -> int:
    """x = residue mod modulus, x = 1 mod q/modulus."""
    other = q // modulus
    if other == 1:
        return residue % q
    t = ((residue - 1) * pow(other, -1, modulus)) % modulus
    return (1 + other * t) % q


@dataclass(frozen=True)
class _UnitGroup:
    q: int
    gens: tuple[int, ...]
    orders: tuple[int, ...]
    logs: dict = field(compare=False, hash=False)


@lru_cache(maxsize=512)
def unit_group(q: int) -> _UnitGroup:
    gens: list[int] = []
    orders: list[int] = []
    for p, e in factorize(q) if q > 1 else ():
        pe = p**e
        if p == 2:
            if e >= 2:
                gens.append(_crt_lift(pe - 1, pe, q))
                orders.append(2)
            if e >= 3:
                gens.append(_crt_lift(5, pe, q))
                orders.append(2 ** (e - 2))
        else:
            gens.append(_crt_lift(_primitive_root_prime_power(p, e), pe, q))
            orders.append(pe // p * (p - 1))
    logs = {}
    for exps in itertools.product(*(range(o) for o in orders)):
        a = 1
        for g, x in zip(gens, exps):
            a = a * pow(g, x, q) % q
        logs[a % q if q > 1 else 0] = exps
    return _UnitGroup(q, tuple(gens), tuple(orders), logs)


# ---------------------------------------------------------------------------
# characters


class DirichletCharacter:
    __slots__ = ("modulus", "exponents", "_group", "_conductor")

    def __init__(self, modulus: int, exponents=None):
        if modulus < 1:
            raise ValueError("modulus must be positive")
        grp = unit_group(modulus)
        if exponents is None:
            exponents = (0,) * len(grp.orders)
        if len(exponents) != len(grp.orders):
            raise ValueError("exponent vector has wrong length")
        exponents = tuple(int(x) % o for x, o in zip(exponents, grp.orders))
        self.modulus = modulus
        self.exponents = exponents
        self._group = grp
        self._conductor = None

    @classmethod
    def principal(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls(modulus)

    @classmethod
    def quadratic(cls, d: int) -> "DirichletCharacter":
        """The character a -> (d / a) (Kronecker symbol), modulo |fundamental disc|."""
        from .arith import kronecker_symbol

        q = abs(d)
        grp = unit_group(q)
        exps = []
        for g, o in zip(grp.gens, grp.orders):
            v = kronecker_symbol(d, g)
            exps.append(0 if v == 1 else o // 2)
        chi = cls(q, exps)
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                expect = kronecker_symbol(d, a)
                if chi.real_value(a) != expect:
                    raise ValueError(f"{d} is not a fundamental discriminant")
        return chi

    # evaluation -----------------------------------------------------------

    def angle(self, a: int):
        """t with chi(a) = exp(2 pi i t), or None when gcd(a, q) > 1."""
        q = self.modulus
        if q == 1:
            return Fraction(0)
        x = self._group.logs.get(a % q)
        if x is None:
            return None
        t = sum(Fraction(e * xi, o) for e, xi, o in zip(self.exponents, x, self._group.orders))
        return t - math.floor(t)

    def __call__(self, a: int) -> complex:
        t = self.angle(a)
        if t is None:
            return 0j
        return cmath.exp(2j * cmath.pi * float(t))

    def root_of_unity(self, a: int):
        """(order, exponent) pair with chi(a) = zeta_order^exponent; None if not a unit."""
        t = self.angle(a)
        if t is None:
            return None
        return (self.order, int(t * self.order))

    def exact(self, a: int) -> Cyclo:
        n = self.order
        t = self.angle(a)
        if t is None:
            return Cyclo(n, [0])
        return Cyclo.root(n, int(t * n))

    def real_value(self, a: int) -> int:
        """chi(a) as an integer; raises if the value is not in {-1, 0, 1}."""
        t = self.angle(a)
        if t is None:
            return 0
        if t == 0:
            return 1
        if t == Fraction(1, 2):
            return -1
        raise ValueError("character value is not real")

    # structure ------------------------------------------------------------

    @property
    def order(self) -> int:
        n = 1
        for e, o in zip(self.exponents, self._group.orders):
            n = math.lcm(n, o // math.gcd(e, o))
        return n

    @property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    def parity(self) -> int:
        """0 for even characters, 1 for odd ones."""
        return 0 if self.modulus <= 2 or self.angle(-1) == 0 else 1

    @property
    def conductor(self) -> int:
        if self._conductor is None:
            q = self.modulus
            for d in divisors(q):
                if all(
                    self.angle(a) == 0
                    for a in range(1, q + 1, d)
                    if math.gcd(a, q) == 1
                ):
                    self._conductor = d
                    break
        return self._conductor

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def primitive(self) -> "DirichletCharacter":
        """The primitive character inducing this one."""
        f = self.conductor
        if f == self.modulus:
            return self
        grp = unit_group(f)
        exps = []
        for g, o in zip(grp.gens, grp.orders):
            a = g
            while math.gcd(a, self.modulus) != 1:
                a += f
            exps.append(int(self.angle(a) * o))
        return DirichletCharacter(f, exps)

    def extend(self, modulus: int) -> "DirichletCharacter":
        """Character mod ``modulus`` (a multiple of q) induced by this one."""
        if modulus % self.modulus:
            raise ValueError("new modulus must be a multiple of the old one")
        grp = unit_group(modulus)
        exps = [int(self.angle(g % self.modulus) * o) for g, o in zip(grp.gens, grp.orders)]
        return DirichletCharacter(modulus, exps)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            q = math.lcm(self.modulus, other.modulus)
            return self.extend(q) * other.extend(q)
        return DirichletCharacter(self.modulus, [a + b for a, b in zip(self.exponents, other.exponents)])

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, [-e for e in self.exponents])

    def __eq__(self, other):
        return (
            isinstance(other, DirichletCharacter)
            and self.modulus == other.modulus
            and self.exponents == other.exponents
        )

    def __hash__(self):
        return hash((self.modulus, self.exponents))

    def __repr__(self):
        return f"DirichletCharacter({self.modulus}, {list(self.exponents)})"

    def label(self) -> str:
        return f"{self.modulus}." + ".".join(map(str, self.exponents)) if self.exponents else f"{self.modulus}.0"


def characters_mod(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters modulo q, principal first."""
    grp = unit_group(q)
    return [DirichletCharacter(q, e) for e in itertools.product(*(range(o) for o in grp.orders))]


def primitive_characters(q: int) -> list[DirichletCharacter]:
    return [chi for chi in characters_mod(q) if chi.is_primitive]
