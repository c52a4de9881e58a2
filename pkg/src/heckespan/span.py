"""Hecke-span searches by exact coefficient rank.

Duality convention: T_n corresponds to the row (a_n(f_1), ..., a_n(f_d)) over
a basis of M_k(Gamma0(N)); span{T_1..T_n} is the full Hecke algebra iff rows
1..n have full rank. The a_0 row is excluded unless asked for.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath

from .arith import coprime_primes, divisors
from .errors import DataUnavailable, Indeterminate, InsufficientPrecision, UnsupportedInput
from .linalg import bareiss_rank, determinant, integer_rows, rank_trace
from .modforms.basis import eisenstein_pairs, full_space_basis
from .modforms.dimensions import _check, dim_cusp_new, dim_eis, dim_modular, gamma0_index, s_and_eps
from .modforms.qexp import QExpansion

SPAN_SCHEMA = "heckespan.span/1"


def sturm_bound(k: int, N: int) -> int:
    """floor(k [SL2(Z):Gamma0(N)] / 12)."""
    if N < 1:
        raise UnsupportedInput("level must be positive")
    return k * gamma0_index(N) // 12


def sage_hypothesis_bound(k: int, N: int) -> int:
    """floor(k m / 12) + 2 dim E_k(Gamma0(N)) + 5, with m the index of Gamma0(N)."""
    _check(k, N)
    return sturm_bound(k, N) + 2 * dim_eis(k, N) + 5


@dataclass(frozen=True)
class CoeffMatrix:
    indices: tuple[int, ...]
    labels: tuple[str, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.labels)


def coeff_matrix(basis: Sequence[QExpansion], indices: Sequence[int]) -> CoeffMatrix:
    if basis and len({f.weight for f in basis}) > 1:
        raise UnsupportedInput("basis forms have different weights")
    for n in indices:
        if n < 0:
            raise UnsupportedInput("coefficient indices must be non-negative")
        for f in basis:
            if n > f.prec:
                raise InsufficientPrecision(f"index {n} exceeds precision {f.prec} of {f.label or 'form'}")
    rows = tuple(tuple(Fraction(f[n]) for f in basis) for n in indices)
    return CoeffMatrix(tuple(indices), tuple(f.label for f in basis), rows)


def exact_rank(m: CoeffMatrix | Sequence[Sequence]) -> int:
    rows = m.rows if isinstance(m, CoeffMatrix) else m
    if not rows:
        return 0
    return bareiss_rank(integer_rows(rows))


@dataclass
class SpanReport:
    weight: int
    level: int
    dim: int
    minimal_n: int | None
    n_max: int
    sturm_bound: int
    sage_hypothesis_bound: int
    rank_trace: list[int]
    minimal_n_with_constant: int | None = None
    level_one_claim: int | None = None
    findings: list[str] = field(default_factory=list)

    @property
    def within_sage_bound(self) -> bool | None:
        if self.minimal_n is None:
            return None
        return self.minimal_n <= self.sage_hypothesis_bound

    def to_dict(self) -> dict:
        return {
            "schema": SPAN_SCHEMA,
            "weight": self.weight,
            "level": self.level,
            "dim": self.dim,
            "minimal_n": self.minimal_n if self.minimal_n is not None else f"not found <= {self.n_max}",
            "minimal_n_with_constant": self.minimal_n_with_constant,
            "n_max": self.n_max,
            "sturm_bound": self.sturm_bound,
            "sage_hypothesis_bound": self.sage_hypothesis_bound,
            "within_sage_bound": self.within_sage_bound,
            "level_one_claim": self.level_one_claim,
            "rank_trace": self.rank_trace,
            "findings": self.findings,
        }


def _first_full(trace: Sequence[int], dim: int, offset: int) -> int | None:
    for i, r in enumerate(trace):
        if r == dim:
            return i + offset
    return None


def minimal_hecke_bound(k: int, N: int, n_max: int, cusp_source) -> SpanReport:
    """Smallest n <= n_max with rank of rows a_1..a_n equal to dim M_k(Gamma0(N))."""
    _check(k, N)
    if n_max < 1:
        raise UnsupportedInput("n_max must be positive")
    dim = dim_modular(k, N)
    try:
        basis = full_space_basis(k, N, n_max, cusp_source)
    except InsufficientPrecision as e:
        raise DataUnavailable(N, k, str(e)) from None
    rows = coeff_matrix(basis, range(1, n_max + 1)).rows
    trace = rank_trace(rows)
    with_const = rank_trace(coeff_matrix(basis, [0]).rows + rows)
    rep = SpanReport(
        weight=k,
        level=N,
        dim=dim,
        minimal_n=_first_full(trace, dim, 1),
        n_max=n_max,
        sturm_bound=sturm_bound(k, N),
        sage_hypothesis_bound=sage_hypothesis_bound(k, N),
        rank_trace=trace,
        # rows a_0, a_1, ..., a_n: the n at which the rank first fills up
        minimal_n_with_constant=_first_full(with_const, dim, 0),
    )
    if N == 1:
        rep.level_one_claim = k // 12
        if rep.minimal_n is not None and rep.minimal_n > k // 12:
            rep.findings.append(f"level-one claim floor(k/12) = {k // 12} is below the measured minimal n = {rep.minimal_n}")
    if rep.within_sage_bound is False:
        rep.findings.append(
            f"COUNTEREXAMPLE: minimal n = {rep.minimal_n} exceeds the Sage hypothesis bound {rep.sage_hypothesis_bound}"
        )
    return rep


def theorem_generator_set(k: int, N: int, X_map: Mapping[int, float]) -> list[tuple[int, int, int]]:
    """Triples (p N / M, p, M) for M | N, primes p <= X_M with p not dividing M; sorted, deduplicated."""
    _check(k, N)
    out = set()
    for M in divisors(N):
        if M not in X_map or X_map[M] is None:
            raise UnsupportedInput(f"no threshold X_M given for the divisor M = {M}")
        for p in coprime_primes(M, X_map[M]):
            out.add((p * N // M, p, M))
    return sorted(out)


def generator_indices(triples: Sequence[tuple[int, int, int]]) -> list[int]:
    return sorted({t[0] for t in triples})


@dataclass
class GeneratorCertificate:
    full_rank: bool
    rank: int
    dim: int
    rows: list[int]   # indices of a full-rank row subset (or the maximal independent subset found)


def verify_generator_set(k: int, N: int, indices: Sequence[int], cusp_source) -> GeneratorCertificate:
    _check(k, N)
    idx = sorted(set(int(i) for i in indices))
    if not idx or idx[0] < 1:
        raise UnsupportedInput("operator indices must be positive")
    basis = full_space_basis(k, N, idx[-1], cusp_source)
    rows = coeff_matrix(basis, idx).rows
    trace = rank_trace(rows)
    chosen = [n for n, r, prev in zip(idx, trace, [0] + trace[:-1]) if r > prev]
    dim = len(basis)
    rank = trace[-1] if trace else 0
    return GeneratorCertificate(rank == dim, rank, dim, chosen)


# ---------------------------------------------------------------------------
# witness primes for det(E | S) != 0

def witness_columns(k: int, M: int, cusp_source, prec: int):
    """Exact columns spanning the Eisenstein newforms and the new cusp spaces of levels d | M."""
    cols = []
    for d in divisors(M):
        for par in eisenstein_pairs(k, d):
            cols.append(("E", par))
    for d in divisors(M):
        if dim_cusp_new(k, d):
            for f in cusp_source.new_cusp_basis(d, k, prec):
                cols.append(("S", f))
    return cols


def _eis_ap(par, p: int) -> Fraction:
    """a_p of E_k^{psi,phi} for a real character pair: psi(p) + phi(p) p^(k-1)."""
    return Fraction(par.psi.real_value(p) + par.phi.real_value(p) * p ** (par.k - 1))


def find_witness_primes(k: int, M: int, X: float, cusp_source, method: str = "exact",
                        radius: float = 1e-12) -> tuple[int, ...] | None:
    """First tuple (lexicographic) of m = eps + s distinct primes <= X, coprime to M, with det(E|S) != 0.

    ``exact``: columns are Eisenstein a_p and integral orbit bases, and
    det(E|S) = prod_i p_i^(-(k-1)/2) det(a_{p_i}(g_j)) is tested exactly.
    ``interval``: columns are the embedded eigenforms, each normalized a_p
    widened by ``radius``; a tuple counts only if its determinant interval
    excludes 0. Raises Indeterminate when no tuple is certified but some could
    not be excluded either.
    """
    _check(k, M)
    s, eps = s_and_eps(k, M)
    m = s + eps
    primes = coprime_primes(M, X)
    if len(primes) < m:
        return None
    if method == "exact":
        cols = witness_columns(k, M, cusp_source, primes[-1])
        assert len(cols) == m
        table = {p: [(_eis_ap(c[1], p) if c[0] == "E" else Fraction(c[1][p])) for c in cols] for p in primes}
        for tup in itertools.combinations(primes, m):
            if determinant([table[p] for p in tup]) != 0:
                return tup
        return None
    if method != "interval":
        raise UnsupportedInput(f"unknown method {method!r}")
    return _find_witness_interval(k, M, primes, m, cusp_source, radius)


def _find_witness_interval(k, M, primes, m, cusp_source, radius):
    iv = mpmath.iv
    pars = [par for d in divisors(M) for par in eisenstein_pairs(k, d)]
    recs = [r for d in divisors(M) if dim_cusp_new(k, d) for r in cusp_source.newforms(d, k)]
    h = (k - 1) / 2
    saved = iv.prec
    iv.prec = 128
    try:
        table = {}
        for p in primes:
            row = []
            for par in pars:
                v = par.psi.real_value(p) * iv.mpf(p) ** (-h) + par.phi.real_value(p) * iv.mpf(p) ** h
                row.append(v)
            for r in recs:
                a = r.ahat(p)
                row.append(iv.mpf([a - radius, a + radius]))
            table[p] = row
        undecided = False
        for tup in itertools.combinations(primes, m):
            d = _iv_det([table[p] for p in tup])
            if d.a > 0 or d.b < 0:
                return tup
            undecided = True
    finally:
        iv.prec = saved
    if undecided:
        raise Indeterminate("no determinant interval excludes zero; some tuples could not be decided")
    return None


def _iv_det(mat):
    """Cofactor expansion (m <= 5 in practice) so every operation is a plain interval op."""
    n = len(mat)
    if n == 1:
        return mat[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        term = mat[0][j] * _iv_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total
