"""Prime sums attached to Sym^2 f, f x g, chi and f x chi, and the F/G/H/E maxima.

Conventions. â_p = a_p / p^((k-1)/2) in [-2, 2], with Satake parameters
alpha + conj(alpha) = â_p. Every sum runs over primes (or prime powers) in
ascending order and is accumulated with math.fsum, so the value does not
depend on how the prime range is produced. Primes dividing the level of a
constituent are left out of psi, theta and S.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from .arith import divisors, is_prime, is_squarefree, primes_upto
from .characters import DirichletCharacter, characters_mod
from .errors import BadPrime, UnsupportedInput
from .modforms.dimensions import dim_cusp_new
from .modforms.newforms import NewformRecord

VARIANTS = ("sym2", "tensor", "char", "twist")
ST_MIN_X = 17.33
ST_SCHEMA = "heckespan.stsums/1"
RAMANUJAN_SLACK = 1e-9


@dataclass(frozen=True)
class PhiSpec:
    variant: str
    f: NewformRecord | None = None
    g: NewformRecord | None = None
    chi: DirichletCharacter | None = None
    ell: float = 0.0

    def __post_init__(self):
        v = self.variant
        if v not in VARIANTS:
            raise UnsupportedInput(f"unknown variant {v!r}; expected one of {VARIANTS}")
        if self.ell < 0:
            raise UnsupportedInput("shift ell must be non-negative")
        need_f = v in ("sym2", "tensor", "twist")
        if need_f and self.f is None:
            raise UnsupportedInput(f"{v} needs a newform f")
        if v == "tensor":
            if self.g is None:
                raise UnsupportedInput("tensor needs a second newform g")
            if _key(self.f) == _key(self.g):
                raise UnsupportedInput("tensor product needs two distinct forms")
            if self.f.weight != self.g.weight:
                raise UnsupportedInput("tensor constituents have different weights")
        if v in ("char", "twist"):
            if self.chi is None:
                raise UnsupportedInput(f"{v} needs a Dirichlet character")
            if not self.chi.is_primitive:
                raise UnsupportedInput("character must be primitive")
        if v == "char" and self.chi.conductor <= 1:
            raise UnsupportedInput("Char needs conductor > 1")

    @property
    def weight(self) -> int | None:
        return self.f.weight if self.f is not None else None

    @property
    def degree(self) -> int:
        return {"sym2": 3, "tensor": 4, "char": 1, "twist": 2}[self.variant]

    def bad_modulus(self) -> int:
        n = 1
        for r in (self.f, self.g):
            if r is not None:
                n = math.lcm(n, r.level)
        if self.chi is not None:
            n = math.lcm(n, self.chi.modulus)
        return n

    def is_good(self, p: int) -> bool:
        return self.bad_modulus() % p != 0

    def label(self) -> str:
        v = self.variant
        if v == "sym2":
            return f"Sym2({self.f.full_label})"
        if v == "tensor":
            return f"{self.f.full_label}x{self.g.full_label}"
        if v == "char":
            return f"chi{self.chi.label()}"
        return f"{self.f.full_label}x chi{self.chi.label()}"


def _key(r: NewformRecord):
    return (r.level, r.weight, r.label, r.embedding_index)


def sym2(f, ell=0.0) -> PhiSpec:
    return PhiSpec("sym2", f=f, ell=ell)


def tensor(f, g, ell=0.0) -> PhiSpec:
    return PhiSpec("tensor", f=f, g=g, ell=ell)


def char(chi, ell=0.0) -> PhiSpec:
    return PhiSpec("char", chi=chi, ell=ell)


def twist(f, chi, ell=0.0) -> PhiSpec:
    return PhiSpec("twist", f=f, chi=chi, ell=ell)


# ---------------------------------------------------------------------------
# local data

def satake_params(ahat: float) -> tuple[complex, complex]:
    """(alpha, conj alpha) on the unit circle with alpha + conj alpha = ahat."""
    if abs(ahat) > 2 + RAMANUJAN_SLACK:
        raise UnsupportedInput(f"|â| = {abs(ahat)} exceeds 2")
    c = max(-1.0, min(1.0, ahat / 2))
    a = complex(c, math.sqrt(1 - c * c))
    return a, a.conjugate()


def _check_good(phi: PhiSpec, p: int) -> None:
    if not is_prime(p):
        raise UnsupportedInput(f"{p} is not prime")
    if not phi.is_good(p):
        raise BadPrime(f"p = {p} divides the level of {phi.label()}")


def phi_prime_coeff_complex(phi: PhiSpec, p: int) -> complex:
    """Normalized a_p(phi) as a complex number (closed formulas)."""
    _check_good(phi, p)
    v = phi.variant
    if v == "sym2":
        a = phi.f.ahat(p)
        return complex(a * a - 1)
    if v == "tensor":
        return complex(phi.f.ahat(p) * phi.g.ahat(p))
    c = phi.chi(p)
    if v == "char":
        return c
    return phi.f.ahat(p) * c


def phi_prime_coeff(phi: PhiSpec, p: int) -> float:
    """Real part of the normalized a_p(phi); exact for real characters."""
    return phi_prime_coeff_complex(phi, p).real


def local_roots(phi: PhiSpec, p: int) -> list[complex]:
    """Satake roots of the Euler factor of phi at a good prime p."""
    _check_good(phi, p)
    v = phi.variant
    if v == "char":
        return [phi.chi(p)]
    a1, a2 = satake_params(phi.f.ahat(p))
    if v == "sym2":
        return [a1 * a1, a1 * a2, a2 * a2]
    if v == "twist":
        c = phi.chi(p)
        return [c * a1, c * a2]
    b1, b2 = satake_params(phi.g.ahat(p))
    return [a1 * b1, a1 * b2, a2 * b1, a2 * b2]


# ---------------------------------------------------------------------------
# Chebyshev-type sums

@dataclass(frozen=True)
class SumSeries:
    X: float
    value: float
    terms: int
    max_partial: float
    imag: float = 0.0

    def to_dict(self) -> dict:
        return {"X": self.X, "value": self.value, "imag": self.imag, "terms": self.terms, "max_partial": self.max_partial}


def _series(X, terms: Sequence[complex]) -> SumSeries:
    if not terms:
        return SumSeries(X, 0.0, 0, 0.0)
    re = [t.real for t in terms]
    im = [t.imag for t in terms]
    peak = max(abs(s) for s in itertools.accumulate(re))
    return SumSeries(X, math.fsum(re), len(terms), peak, math.fsum(im))


def _good_primes(phi: PhiSpec, X: float) -> list[int]:
    bad = phi.bad_modulus()
    return [int(p) for p in primes_upto(X) if bad % int(p)]


def theta_phi(phi: PhiSpec, X: float) -> SumSeries:
    """sum over good p <= X of a_p(phi) p^ell log p."""
    terms = [phi_prime_coeff_complex(phi, p) * (p**phi.ell * math.log(p)) for p in _good_primes(phi, X)]
    return _series(X, terms)


def S_phi(phi: PhiSpec, X: float) -> SumSeries:
    """sum over good p <= X of a_p(phi) p^ell."""
    terms = [phi_prime_coeff_complex(phi, p) * p**phi.ell for p in _good_primes(phi, X)]
    return _series(X, terms)


def psi_phi(phi: PhiSpec, X: float) -> SumSeries:
    """sum over good prime powers p^m <= X of (sum_i alpha_i^m) log p (p^m)^ell, ordered by p then m."""
    terms = []
    for p in _good_primes(phi, X):
        roots = local_roots(phi, p)
        lp = math.log(p)
        q, m = p, 1
        while q <= X:
            terms.append(sum(r**m for r in roots) * (lp * float(q) ** phi.ell))
            q *= p
            m += 1
    return _series(X, terms)


def prime_power_tail(ell: float, X: float, mu: float = 4.0) -> float:
    """mu * sum_{m >= 2} sum_{p <= X^(1/m)} p^(ell m) log p, the bound on |psi - theta|."""
    terms = []
    m = 2
    while 2**m <= X:
        for p in primes_upto(X ** (1.0 / m) * (1 + 1e-12)):
            p = int(p)
            if p**m <= X:
                terms.append(float(p) ** (ell * m) * math.log(p))
        m += 1
    return mu * math.fsum(terms)


def abel_S_from_theta(phi: PhiSpec, X: float) -> float:
    """theta(X)/log X + int_2^X theta(t)/(t log^2 t) dt, with theta a step function (integrated exactly)."""
    if X < 2:
        return 0.0
    ps = _good_primes(phi, X)
    steps = [(phi_prime_coeff_complex(phi, p) * (p**phi.ell * math.log(p))).real for p in ps]
    pieces = []
    theta = 0.0
    for i, (p, theta) in enumerate(zip(ps, itertools.accumulate(steps))):
        hi = ps[i + 1] if i + 1 < len(ps) else X
        if hi > p:
            pieces.append(theta * (1 / math.log(p) - 1 / math.log(hi)))
    return theta / math.log(X) + math.fsum(pieces)


# ---------------------------------------------------------------------------
# the F, G, H, E maxima

def pi_M(M: int, ell: float, X: float) -> float:
    """sum over primes p <= X with p not dividing M of p^ell."""
    ps = [int(p) for p in primes_upto(X) if M % int(p)]
    return math.fsum(float(p) ** ell for p in ps)


def _coprime(M: int, X: float) -> list[int]:
    return [int(p) for p in primes_upto(X) if M % int(p)]


def _char_table(chi: DirichletCharacter) -> list[complex]:
    return [chi(a) for a in range(chi.modulus)]


def nonprincipal_characters(M: int) -> list[DirichletCharacter]:
    """chi mod M with conductor > 1."""
    return [c for c in characters_mod(M) if c.conductor > 1]


@dataclass
class MaxSum:
    value: float
    argmax: str | None
    candidates: int
    empty: bool = False


def _max_abs(items) -> MaxSum:
    best, arg, n = 0.0, None, 0
    for label, v in items:
        n += 1
        if arg is None or abs(v) > best:
            best, arg = abs(v), label
    return MaxSum(best, arg, n, empty=(n == 0))


def newforms_dividing(M: int, k: int, cusp_source, X: float) -> list[NewformRecord]:
    out = []
    for d in divisors(M):
        if dim_cusp_new(k, d):
            out += cusp_source.newforms(d, k, ap_max=int(X))
    return out


def E_sum(M: int, k: int, X: float) -> float:
    """pi_{M,1-k}(X) + 2 pi_M(X)."""
    return pi_M(M, 1 - k, X) + 2 * pi_M(M, 0, X)


def F_max(M: int, k: int, X: float) -> MaxSum:
    ps = _coprime(M, X)
    w = [float(p) ** ((k - 1) / 2) for p in ps]

    def items():
        for chi in nonprincipal_characters(M):
            t = _char_table(chi)
            re = math.fsum(t[p % M].real * x for p, x in zip(ps, w))
            im = math.fsum(t[p % M].imag * x for p, x in zip(ps, w))
            yield chi.label(), complex(re, im)

    return _max_abs(items())


def F_sum(M: int, k: int, X: float) -> float:
    return F_max(M, k, X).value


def G_max(M: int, k: int, X: float, cusp_source) -> MaxSum:
    ps = _coprime(M, X)
    forms = newforms_dividing(M, k, cusp_source, X)
    w = [float(p) ** ((k - 1) / 2) for p in ps]

    def items():
        for f in forms:
            a = [f.ahat(p) * x for p, x in zip(ps, w)]
            for chi in nonprincipal_characters(M):
                t = _char_table(chi)
                re = math.fsum(t[p % M].real * y for p, y in zip(ps, a))
                im = math.fsum(t[p % M].imag * y for p, y in zip(ps, a))
                yield f"{f.full_label}*{chi.label()}", complex(re, im)

    return _max_abs(items())


def G_sum(M: int, k: int, X: float, cusp_source) -> float:
    return G_max(M, k, X, cusp_source).value


def U2(t: float) -> float:
    """Degree-2 Chebyshev polynomial of the second kind, 4t^2 - 1."""
    return 4 * t * t - 1


def H_max(M: int, k: int, X: float, cusp_source, normalized: bool = False) -> MaxSum:
    """Max of |sum' U2(â_p(f))| and |sum' â_p(f) â_p(g)| (f != g).

    ``normalized`` evaluates U2 at â_p/2 = cos(theta_p), i.e. the Sym^2
    coefficient â_p^2 - 1, instead of at â_p itself.
    """
    ps = _coprime(M, X)
    forms = newforms_dividing(M, k, cusp_source, X)
    table = {_key(f): [f.ahat(p) for p in ps] for f in forms}

    def items():
        for f in forms:
            a = table[_key(f)]
            if normalized:
                yield f"U2({f.full_label})", math.fsum(U2(x / 2) for x in a)
            else:
                yield f"U2({f.full_label})", math.fsum(U2(x) for x in a)
        for f, g in itertools.combinations(forms, 2):
            yield f"{f.full_label}x{g.full_label}", math.fsum(x * y for x, y in zip(table[_key(f)], table[_key(g)]))

    return _max_abs(items())


def H_sum(M: int, k: int, X: float, cusp_source, normalized: bool = False) -> float:
    return H_max(M, k, X, cusp_source, normalized).value


def st_alpha(k: int, M: int) -> float:
    return 2605 + 87 * k + (248 + 6 * k) * math.log(M)


@dataclass
class STReport:
    M: int
    k: int
    X: float
    F: float
    G: float
    H: float
    H_normalized: float
    E: float
    alpha: float
    bound_F: float
    bound_H: float
    variant_flags: list[str] = field(default_factory=list)

    @property
    def ratios(self) -> dict:
        return {
            "F": self.F / self.bound_F,
            "G": self.G / self.bound_F,
            "H": self.H / self.bound_H,
            "H_normalized": self.H_normalized / self.bound_H,
        }

    @property
    def ok(self) -> bool:
        return all(r <= 1 for r in self.ratios.values())

    def to_dict(self) -> dict:
        return {
            "schema": ST_SCHEMA,
            "M": self.M, "k": self.k, "X": self.X,
            "F": self.F, "G": self.G, "H": self.H, "H_normalized": self.H_normalized, "E": self.E,
            "alpha": self.alpha, "bound_F": self.bound_F, "bound_H": self.bound_H,
            "ratios": self.ratios, "ok": self.ok, "variant_flags": self.variant_flags,
        }


def check_effectiveST(M: int, k: int, X: float, cusp_source) -> STReport:
    """Measure F, G, H at X and compare with alpha X^(k/2) log X and alpha X^(1/2) log X."""
    if X < ST_MIN_X:
        raise UnsupportedInput(f"X = {X} is below {ST_MIN_X}")
    if M < 1 or not is_squarefree(M):
        raise UnsupportedInput("M must be squarefree")
    a = st_alpha(k, M)
    F = F_max(M, k, X)
    G = G_max(M, k, X, cusp_source)
    H = H_max(M, k, X, cusp_source)
    Hn = H_max(M, k, X, cusp_source, normalized=True)
    flags = []
    for name, ms in (("F", F), ("G", G), ("H", H)):
        if ms.empty:
            flags.append(f"{name}: empty index set, defined as 0")
    flags.append("H: U2 applied to â_p (literal); H_normalized: U2 applied to â_p/2")
    lx = math.log(X)
    return STReport(M, k, X, F.value, G.value, H.value, Hn.value, E_sum(M, k, X), a,
                    a * X ** (k / 2) * lx, a * math.sqrt(X) * lx, flags)

