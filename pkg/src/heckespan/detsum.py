"""Block matrices (E | S) over prime tuples, their squared-determinant sums, and the combinatorics behind them.

Rows are indexed by primes and columns by forms: row i of E holds the
normalized Eisenstein coefficients psi_j(p_i) p_i^((1-k)/2) + phi_j(p_i) p_i^((k-1)/2),
row i of S holds a_{p_i}(f_j) / p_i^((k-1)/2). Every entry of row i carries
the factor p_i^((1-k)/2), so |det|^2 is p_1^(1-k) ... p_m^(1-k) times the
square of an integer determinant whenever the characters are real and the
newforms rational. That exact path is used when available.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .arith import coprime_primes, divisors
from .errors import CapacityError, UnsupportedInput
from .linalg import bareiss_det, determinant
from .modforms.basis import eisenstein_pairs
from .modforms.dimensions import dim_cusp_new
from .modforms.eisenstein import EisensteinParams
from .modforms.newforms import NewformRecord

MAX_M = 4
MAX_PRIMES = 60
COMPLEX_PREC = 96


@dataclass(frozen=True)
class BlockMatrixSpec:
    eis: tuple[EisensteinParams, ...]
    cusp: tuple[NewformRecord, ...]
    k: int
    M: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eis", tuple(self.eis))
        object.__setattr__(self, "cusp", tuple(self.cusp))
        if self.m == 0:
            raise UnsupportedInput("block matrix needs at least one column")
        if any(e.k != self.k for e in self.eis) or any(r.weight != self.k for r in self.cusp):
            raise UnsupportedInput("column specs disagree on the weight")
        if any(self.M % r.level for r in self.cusp):
            raise UnsupportedInput("newform levels must divide M")

    @property
    def eps(self) -> int:
        return len(self.eis)

    @property
    def s(self) -> int:
        return len(self.cusp)

    @property
    def m(self) -> int:
        return len(self.eis) + len(self.cusp)

    @property
    def rational(self) -> bool:
        return all(e.psi.is_real and e.phi.is_real for e in self.eis) and all(r.ap_exact is not None for r in self.cusp)


def block_spec(k: int, M: int, cusp_source) -> BlockMatrixSpec:
    """All Eisenstein newform pairs and embedded cusp newforms of levels d | M."""
    eis = [par for d in divisors(M) for par in eisenstein_pairs(k, d)]
    cusp = [r for d in divisors(M) if dim_cusp_new(k, d) for r in cusp_source.newforms(d, k)]
    return BlockMatrixSpec(tuple(eis), tuple(cusp), k, M)


def _check_primes(spec: BlockMatrixSpec, primes: Sequence[int]) -> None:
    if len(primes) != spec.m:
        raise UnsupportedInput(f"need {spec.m} primes, got {len(primes)}")
    if len(set(primes)) != len(primes):
        raise UnsupportedInput("primes must be distinct")
    bad = [p for p in primes if spec.M % p == 0]
    if bad:
        raise UnsupportedInput(f"primes {bad} divide M = {spec.M}")


def raw_row(spec: BlockMatrixSpec, p: int, exact: bool = True) -> list:
    """Row p with the common factor p^((1-k)/2) removed."""
    pk = p ** (spec.k - 1)
    row = []
    for e in spec.eis:
        if exact:
            row.append(e.psi.real_value(p) + e.phi.real_value(p) * pk)
        else:
            row.append(mpmath.mpc(e.psi(p)) + mpmath.mpc(e.phi(p)) * pk)
    for r in spec.cusp:
        row.append(int(r.ap_exact[p]) if exact else mpmath.mpf(r.ap[p]))
    return row


def es_matrix(spec: BlockMatrixSpec, primes: Sequence[int]) -> list[list[complex]]:
    """The m x m matrix (E | S)(p_1, ..., p_m) with the displayed normalizations."""
    _check_primes(spec, primes)
    h = (spec.k - 1) / 2
    out = []
    for p in primes:
        row = [complex(e.psi(p)) * p ** (-h) + complex(e.phi(p)) * p**h for e in spec.eis]
        row += [r.ahat(p) for r in spec.cusp]
        out.append(row)
    return out


def _det_mp(rows):
    return mpmath.det(mpmath.matrix(rows)) if rows else mpmath.mpf(1)


@dataclass
class DetSumResult:
    X: float
    value: float
    exact: Fraction | None
    normalized: float
    tuples: int
    distinct_only: bool
    primes: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"X": self.X, "value": self.value, "exact": None if self.exact is None else str(self.exact),
                "normalized": self.normalized, "tuples": self.tuples, "distinct_only": self.distinct_only}


def _guard(spec: BlockMatrixSpec, n_primes: int) -> None:
    if spec.m > MAX_M or n_primes > MAX_PRIMES:
        cost = n_primes**spec.m
        raise CapacityError(f"m = {spec.m}, pi_M(X) = {n_primes}: about {cost:.3g} ordered tuples "
                            f"(limits m <= {MAX_M}, pi_M(X) <= {MAX_PRIMES})")


def det_square_sum(spec: BlockMatrixSpec, X: float, distinct_only: bool = False) -> DetSumResult:
    """Sum of |det (E|S)|^2 over ordered m-tuples of primes <= X coprime to M.

    Tuples with a repeated prime have two equal rows and contribute 0, so the
    sum with repeats equals the sum over distinct tuples; each unordered set of
    distinct primes is evaluated once and weighted by m!.
    """
    ps = coprime_primes(spec.M, X)
    _guard(spec, len(ps))
    m = spec.m
    count = len(ps) ** m if not distinct_only else math.perm(len(ps), m)
    exact = None
    if spec.rational:
        rows = {p: raw_row(spec, p) for p in ps}
        w = {p: Fraction(1, p ** (spec.k - 1)) for p in ps}
        total = Fraction(0)
        for tup in itertools.combinations(ps, m):
            d = bareiss_det([rows[p] for p in tup])
            if d:
                total += math.prod(w[p] for p in tup) * d * d
        exact = total * math.factorial(m)
        value = float(exact)
    else:
        with mpmath.workprec(COMPLEX_PREC):
            rows = {p: raw_row(spec, p, exact=False) for p in ps}
            terms = []
            for tup in itertools.combinations(ps, m):
                d = _det_mp([rows[p] for p in tup])
                terms.append(abs(d) ** 2 / math.prod(mpmath.mpf(p) ** (spec.k - 1) for p in tup))
            value = float(mpmath.fsum(terms) * math.factorial(m))
    norm = value * 4**spec.s / math.factorial(m)
    return DetSumResult(X, value, exact, norm, count, distinct_only, ps)


def det_square_sum_ordered(spec: BlockMatrixSpec, X: float) -> Fraction:
    """Literal enumeration of every ordered tuple, repeats included (rational specs only, small X)."""
    if not spec.rational:
        raise UnsupportedInput("the literal enumeration is exact only for rational specs")
    ps = coprime_primes(spec.M, X)
    _guard(spec, len(ps))
    rows = {p: raw_row(spec, p) for p in ps}
    total = Fraction(0)
    for tup in itertools.product(ps, repeat=spec.m):
        d = bareiss_det([rows[p] for p in tup])
        if d:
            total += Fraction(d * d, math.prod(p ** (spec.k - 1) for p in tup))
    return total


def gram_route(spec: BlockMatrixSpec, X: float) -> Fraction:
    """Cauchy-Binet route: m! det(sum_p p^(1-k) r(p)^T r(p)), r(p) the raw row."""
    if not spec.rational:
        raise UnsupportedInput("exact Gram route needs a rational spec")
    ps = coprime_primes(spec.M, X)
    m = spec.m
    G = [[Fraction(0)] * m for _ in range(m)]
    for p in ps:
        r = raw_row(spec, p)
        w = Fraction(1, p ** (spec.k - 1))
        for i in range(m):
            for j in range(m):
                G[i][j] += w * r[i] * r[j]
    return math.factorial(m) * determinant(G)


# ---------------------------------------------------------------------------
# generalized Laplace expansion and the pairwise expansion of |det|^2

def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def laplace_sign(alpha: Sequence[int]) -> int:
    """(-1)^(sum alpha_i + sum_{i <= eps} i), 1-based row indices alpha."""
    return -1 if (sum(alpha) + len(alpha) * (len(alpha) + 1) // 2) % 2 else 1


def _exact_det(rows) -> Fraction:
    return determinant(rows) if rows else Fraction(1)


def laplace_expansion(matrix: Sequence[Sequence], eps: int) -> Fraction:
    """Sum over eps-subsets alpha of the rows of sign(alpha) det(E_alpha) det(S_beta)."""
    m = len(matrix)
    if not 0 <= eps <= m:
        raise UnsupportedInput("eps must lie between 0 and m")
    total = Fraction(0)
    for alpha in itertools.combinations(range(m), eps):
        beta = [i for i in range(m) if i not in alpha]
        E = [[Fraction(matrix[i][j]) for j in range(eps)] for i in alpha]
        S = [[Fraction(matrix[i][j]) for j in range(eps, m)] for i in beta]
        total += laplace_sign([a + 1 for a in alpha]) * _exact_det(E) * _exact_det(S)
    return total


def laplace_expansion_check(matrix: Sequence[Sequence], eps: int) -> bool:
    m = len(matrix)
    if m > 6:
        raise UnsupportedInput("expansion check limited to m <= 6")
    if any(len(r) != m for r in matrix):
        raise UnsupportedInput("matrix must be square")
    return laplace_expansion(matrix, eps) == _exact_det([[Fraction(x) for x in r] for r in matrix])


def pair_expansion_sum(spec: BlockMatrixSpec, X: float) -> Fraction:
    """Sum over ordered tuples of |det|^2 rebuilt from the pairwise expansion.

    For every pair of row splits alpha_i | beta_i and bijections sigma_i:
    alpha_i -> E-columns, tau_i: beta_i -> S-columns, row a contributes
    X1_a * conj(X2_a), where X_i is the E entry (a in alpha_i) or S entry. The
    tuple sum factorizes over rows because tuples range over all of primes^m.
    """
    if not spec.rational:
        raise UnsupportedInput("exact pair expansion needs a rational spec")
    ps = coprime_primes(spec.M, X)
    m, e = spec.m, spec.eps
    if m > 3:
        raise UnsupportedInput("pair expansion limited to m <= 3")
    rows = {p: raw_row(spec, p) for p in ps}
    w = {p: Fraction(1, p ** (spec.k - 1)) for p in ps}
    # row sums P[c1][c2] = sum_p w(p) r_c1(p) r_c2(p); the same for every row position
    P = [[sum((w[p] * rows[p][c1] * rows[p][c2] for p in ps), Fraction(0)) for c2 in range(m)] for c1 in range(m)]
    total = Fraction(0)
    splits = list(itertools.combinations(range(m), e))
    for a1 in splits:
        b1 = [i for i in range(m) if i not in a1]
        for a2 in splits:
            b2 = [i for i in range(m) if i not in a2]
            sgn_split = laplace_sign([x + 1 for x in a1]) * laplace_sign([x + 1 for x in a2])
            for s1 in itertools.permutations(range(e)):
                for s2 in itertools.permutations(range(e)):
                    for t1 in itertools.permutations(range(m - e)):
                        for t2 in itertools.permutations(range(m - e)):
                            col1 = {a: s1[i] for i, a in enumerate(a1)} | {b: e + t1[i] for i, b in enumerate(b1)}
                            col2 = {a: s2[i] for i, a in enumerate(a2)} | {b: e + t2[i] for i, b in enumerate(b2)}
                            sign = sgn_split * _perm_sign(s1) * _perm_sign(s2) * _perm_sign(t1) * _perm_sign(t2)
                            term = Fraction(sign)
                            for a in range(m):
                                term *= P[col1[a]][col2[a]]
                                if not term:
                                    break
                            total += term
    return total


# ---------------------------------------------------------------------------
# rencontres numbers and Eq-pair counts

def derangements(n: int) -> int:
    if n < 0:
        raise UnsupportedInput("n must be non-negative")
    a, b = 1, 0  # D_0, D_1
    if n == 0:
        return 1
    for i in range(2, n + 1):
        a, b = b, (i - 1) * (a + b)
    return b


def rencontres(ell: int, gamma: int) -> int:
    """Permutations of ell letters with exactly gamma fixed points."""
    if not 0 <= gamma <= ell:
        raise UnsupportedInput("need 0 <= gamma <= ell")
    return math.comb(ell, gamma) * derangements(ell - gamma)


def _perms(d: int) -> np.ndarray:
    if d == 0:
        return np.zeros((1, 0), dtype=np.int8)
    return np.array(list(itertools.permutations(range(d))), dtype=np.int8).reshape(-1, d)


def eq_pair_histogram(d: int, ell: int) -> list[int]:
    """Brute force: for D1 = {0..d-1}, D2 = {d-ell..2d-ell-1} and bijections rho_i: D_i -> {0..d-1},
    the number of pairs with Eq(rho1, rho2) = gamma, for gamma = 0..ell."""
    if not 0 <= ell <= d:
        raise UnsupportedInput("need 0 <= ell <= d")
    if d > 7:
        raise CapacityError("brute-force pair count limited to d <= 7")
    P = _perms(d)
    # rho1 on the overlap is its last ell positions; rho2 on the overlap is its first ell positions
    o1 = P[:, d - ell :]
    o2 = P[:, :ell]
    hist = np.zeros(ell + 1, dtype=np.int64)
    for row in o1:
        eq = (o2 == row).sum(axis=1) if ell else np.zeros(len(P), dtype=np.int64)
        hist += np.bincount(eq, minlength=ell + 1)
    return [int(x) for x in hist]


def count_eq_pairs(d: int, ell: int, gamma: int) -> int:
    if not 0 <= gamma <= ell:
        raise UnsupportedInput("need 0 <= gamma <= ell")
    return eq_pair_histogram(d, ell)[gamma]


def formula_eq_pairs(d: int, ell: int, gamma: int) -> int:
    """d! (d - ell)! F(ell, gamma), the displayed closed form."""
    return math.factorial(d) * math.factorial(d - ell) * rencontres(ell, gamma)


def corrected_eq_pairs(d: int, ell: int, gamma: int) -> int:
    """Exact count: choose rho1 freely, then sum over where rho2 sends the overlap.

    rho2 restricted to the overlap is an injection into {0..d-1}; gamma of its values
    agree with rho1, and the remaining d - ell points of D2 fill the rest in (d - ell)! ways.
    """
    total = 0
    # positions of the overlap where rho2 differs from rho1: ell - gamma of them, values avoid agreement
    for j in range(ell - gamma + 1):
        # inclusion-exclusion over j extra forced agreements among the differing points
        total += (-1) ** j * math.comb(ell - gamma, j) * math.perm(d - gamma - j, ell - gamma - j)
    return math.factorial(d) * math.comb(ell, gamma) * total * math.factorial(d - ell)


@dataclass
class PairComparison:
    d: int
    ell: int
    brute: list[int]
    formula: list[int]

    @property
    def agree(self) -> bool:
        return self.brute == self.formula

    def discrepancies(self) -> list[tuple[int, int, int]]:
        return [(g, b, f) for g, (b, f) in enumerate(zip(self.brute, self.formula)) if b != f]


def compare_eq_pairs(d_max: int = 7) -> list[PairComparison]:
    out = []
    for d in range(d_max + 1):
        for ell in range(d + 1):
            out.append(PairComparison(d, ell, eq_pair_histogram(d, ell), [formula_eq_pairs(d, ell, g) for g in range(ell + 1)]))
    return out


# ---------------------------------------------------------------------------
# the two summation estimates

@dataclass
class EstimateCase:
    estimate: str
    params: dict
    lhs: float
    rhs: float
    ok: bool | None
    skipped: str | None = None


def _mpq(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def first_estimate_literal(ell: int, T) -> tuple[Fraction, mpmath.mpf]:
    """ell! sum_{gamma=0}^{ell} T^ell / gamma!  versus  log(ell + 2) T^ell."""
    T = Fraction(T)
    lhs = math.factorial(ell) * sum(T**ell / math.factorial(g) for g in range(ell + 1))
    with mpmath.workprec(128):
        rhs = mpmath.log(ell + 2) * _mpq(T) ** ell
    return lhs, rhs


def first_estimate_inferred(ell: int, T) -> tuple[Fraction, mpmath.mpf]:
    """sum_{gamma < ell} F(ell, gamma) T^gamma  versus  ell log(ell + 3) T^(ell-1)."""
    T = Fraction(T)
    lhs = sum(rencontres(ell, g) * T**g for g in range(ell))
    with mpmath.workprec(128):
        rhs = ell * mpmath.log(ell + 3) * _mpq(T) ** (ell - 1)
    return lhs, rhs


def second_estimate(m: int, k: int, T) -> tuple[Fraction, mpmath.mpf]:
    """m! (m+k)! sum_{l=0}^{m} T^l / (l! (k+l)!)  versus  log(m+2) log(m+k+2) T^m."""
    T = Fraction(T)
    lhs = math.factorial(m) * math.factorial(m + k) * sum(
        T**l / (math.factorial(l) * math.factorial(k + l)) for l in range(m + 1))
    with mpmath.workprec(128):
        rhs = mpmath.log(m + 2) * mpmath.log(m + k + 2) * _mpq(T) ** m
    return lhs, rhs


def _cmp(lhs: Fraction, rhs) -> bool:
    with mpmath.workprec(128):
        return _mpq(lhs) <= rhs


def combinatorial_estimate_check(ell_max: int = 10, m_max: int = 10, k_max: int = 10,
                                 T_values: Sequence[float] = (12, 24, 60, 120, 1200, 10**4, 10**6)) -> list[EstimateCase]:
    """Evaluate both estimates on the grid; cases below their T threshold are flagged, not judged."""
    if max(ell_max, m_max, k_max) > 10 or max(T_values) > 10**6:
        raise UnsupportedInput("grid limited to ell, m, k <= 10 and T <= 10^6")
    out = []
    for ell in range(1, ell_max + 1):
        for T in T_values:
            for name, fn in (("first-literal", first_estimate_literal), ("first-inferred", first_estimate_inferred)):
                lhs, rhs = fn(ell, T)
                if T < 12 * ell:
                    out.append(EstimateCase(name, {"ell": ell, "T": T}, float(lhs), float(rhs), None, f"T < 12 ell = {12 * ell}"))
                else:
                    out.append(EstimateCase(name, {"ell": ell, "T": T}, float(lhs), float(rhs), _cmp(lhs, rhs)))
    for m in range(1, m_max + 1):
        for k in range(0, k_max + 1):
            for T in T_values:
                lhs, rhs = second_estimate(m, k, T)
                thr = 6 * m * (m + k)
                if T < thr:
                    out.append(EstimateCase("second", {"m": m, "k": k, "T": T}, float(lhs), float(rhs), None, f"T < 6m(m+k) = {thr}"))
                else:
                    out.append(EstimateCase("second", {"m": m, "k": k, "T": T}, float(lhs), float(rhs), _cmp(lhs, rhs)))
    return out


# ---------------------------------------------------------------------------
# timing

def benchmark(spec: BlockMatrixSpec, X: float, repeat: int = 3) -> dict:
    """Throughput of the tuple enumeration in det_square_sum."""
    best = math.inf
    res = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = det_square_sum(spec, X)
        best = min(best, time.perf_counter() - t0)
    sets = math.comb(len(res.primes), spec.m)
    return {"m": spec.m, "X": X, "primes": len(res.primes), "determinants": sets, "seconds": best,
            "determinants_per_second": sets / best if best > 0 else math.inf, "exact": res.exact is not None}
