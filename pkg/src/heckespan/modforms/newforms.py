"""Newform eigenvalue records and Hecke-consistency checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from ..arith import factorize, is_prime

RAMANUJAN_TOL = 1e-9


@dataclass(frozen=True)
class NewformRecord:
    """One embedding of a Hecke eigenform in S_k^new(Gamma0(level)).

    ``ap`` holds the embedded unnormalized a_p; ``ap_exact`` is present when
    the coefficient field is Q; ``an_exact`` optionally carries the full
    integral q-expansion a_0..a_P of a rational newform.
    """

    level: int
    weight: int
    label: str                 # orbit label, e.g. "11.4.a.a"
    embedding_index: int
    ap: Mapping[int, float]
    ap_exact: Mapping[int, int] | None = None
    an_exact: tuple[int, ...] | None = None
    orbit_dim: int = 1
    source: str = ""
    status: str = "unverified"

    @property
    def full_label(self) -> str:
        return f"{self.label}.{self.embedding_index + 1}"

    def primes(self) -> list[int]:
        return sorted(self.ap)

    def ahat(self, p: int) -> float:
        """Normalized coefficient a_p / p^((k-1)/2)."""
        try:
            a = self.ap[p]
        except KeyError:
            from ..errors import DataUnavailable

            raise DataUnavailable(self.level, self.weight, f"a_{p} missing for {self.full_label}") from None
        return a / p ** ((self.weight - 1) / 2)

    def with_status(self, status: str) -> "NewformRecord":
        return replace(self, status=status)


@dataclass
class HeckeReport:
    label: str
    checked_primes: int = 0
    checked_products: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def hecke_check(rec: NewformRecord, k: int | None = None, up_to: int | None = None) -> HeckeReport:
    """Ramanujan bound at good primes; with exact a_n also multiplicativity and prime-power recurrences."""
    k = rec.weight if k is None else k
    rep = HeckeReport(rec.full_label)
    primes = [p for p in rec.primes() if up_to is None or p <= up_to]
    for p in primes:
        if rec.level % p == 0:
            continue
        ahat = rec.ap[p] / p ** ((k - 1) / 2)
        rep.checked_primes += 1
        if not math.isfinite(ahat) or abs(ahat) > 2 + RAMANUJAN_TOL:
            rep.violations.append(f"Ramanujan bound fails at p={p}: |a_p/p^((k-1)/2)| = {abs(ahat):.6g}")
    if rec.ap_exact is not None:
        for p in primes:
            if p in rec.ap_exact and abs(rec.ap_exact[p] - rec.ap[p]) > 1e-6 * max(1.0, abs(rec.ap[p])):
                rep.violations.append(f"exact and embedded a_{p} disagree")
    if rec.an_exact is not None:
        _check_multiplicative(rec.an_exact, k, rec.level, up_to, rep)
    return rep


def _check_multiplicative(a: Sequence[int], k: int, N: int, up_to: int | None, rep: HeckeReport) -> None:
    P = len(a) - 1 if up_to is None else min(len(a) - 1, up_to)
    if P >= 1 and a[1] != 1:
        rep.violations.append(f"a_1 = {a[1]} is not 1")
        return
    for n in range(2, P + 1):
        fac = factorize(n)
        if len(fac) > 1:
            p, e = fac[0]
            m = p**e
            rep.checked_products += 1
            if a[n] != a[m] * a[n // m]:
                rep.violations.append(f"a_{n} != a_{m} a_{n // m}")
            continue
        p, e = fac[0]
        if e == 1:
            continue
        rep.checked_products += 1
        # a_{p^e} = a_p a_{p^(e-1)} - chi_0(p) p^(k-1) a_{p^(e-2)}
        good = p ** (k - 1) if N % p else 0
        expect = a[p] * a[n // p] - good * a[n // (p * p)]
        if a[n] != expect:
            rep.violations.append(f"prime-power recurrence fails at n={n}")


def records_from_expansion(level: int, weight: int, label: str, coeffs: Sequence[int], source: str) -> NewformRecord:
    """Record for a rational newform given its integral q-expansion."""
    ap = {p: float(coeffs[p]) for p in range(2, len(coeffs)) if is_prime(p)}
    ape = {p: int(coeffs[p]) for p in ap}
    return NewformRecord(level, weight, label, 0, ap, ape, tuple(int(c) for c in coeffs), 1, source)
