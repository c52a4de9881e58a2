"""Hecke operators on q-expansions and decomposition of a Hecke-stable space into orbits.

A space is given by integer q-expansions (lists a_0..a_P). The decomposition
returns, per Galois orbit of eigenforms, an integral basis (the trace form
and its images under a fixed Hecke operator) plus real embeddings of the
normalized eigenforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import sympy

from ..arith import divisors, primes_upto
from ..linalg import integer_rows, nullspace, rref


def hecke_operator(coeffs: Sequence[int], n: int, k: int, N: int, prec: int | None = None) -> list:
    """a_m(T_n f) = sum_{d | gcd(m, n), (d, N) = 1} d^(k-1) a_{mn/d^2}(f), for m = 0..prec."""
    if prec is None:
        prec = (len(coeffs) - 1) // n
    if n * prec > len(coeffs) - 1:
        raise ValueError(f"T_{n} to precision {prec} needs {n * prec} coefficients")
    out = []
    for m in range(prec + 1):
        if m == 0:
            # constant term: sum over d | n coprime to N of d^(k-1) a_0
            out.append(sum(d ** (k - 1) for d in divisors(n) if math.gcd(d, N) == 1) * coeffs[0])
            continue
        g = math.gcd(m, n)
        total = 0
        for d in divisors(g):
            if math.gcd(d, N) == 1:
                total += d ** (k - 1) * coeffs[m * n // (d * d)]
        out.append(total)
    return out


def _combine(coeffs_list: Sequence[Sequence[int]], vec: Sequence[Fraction], prec: int) -> list[Fraction]:
    out = [Fraction(0)] * (prec + 1)
    for c, f in zip(vec, coeffs_list):
        if c:
            for i in range(prec + 1):
                if f[i]:
                    out[i] += c * f[i]
    return out


def primitive_integral(vec: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to a primitive integer vector (first nonzero entry positive)."""
    ints = integer_rows([vec])[0]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        return ints
    lead = next(x for x in ints if x)
    if lead < 0:
        g = -g
    return [x // g for x in ints]


@dataclass
class Orbit:
    """One Galois orbit of newforms inside a Hecke-stable space."""

    dim: int
    charpoly: list[int]            # of the splitting operator on the orbit, monic, high degree first
    operators: list[int]           # the splitting operator is the sum of T_n over these n
    basis: list[list[int]]         # integral basis: trace form and its images under the splitting operator
    eigenvalues: list = field(default_factory=list)   # mpf roots, ascending
    vinv: object = None            # inverse Vandermonde matrix taking basis to eigenforms


def hecke_matrix(basis: Sequence[Sequence[int]], n: int, k: int, N: int, pivot_prec: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Matrix A of T_n on span(basis) with T_n b_j = sum_i A[i][j] b_i; also returns the pivot indices used.

    Pivots are searched among coefficients 0..pivot_prec, which must separate the space.
    """
    if pivot_prec is None:
        pivot_prec = min(len(b) for b in basis) - 1
    red, pivots = rref([b[: pivot_prec + 1] for b in basis])
    if len(red) != len(basis):
        raise ValueError("basis is not linearly independent")
    top = pivots[-1]
    images = [hecke_operator(b, n, k, N, prec=top) for b in basis]
    # coordinates of each image w.r.t. the reduced basis, then change back to the given basis
    coords_red = [[Fraction(img[p]) for p in pivots] for img in images]
    # basis_j = sum_i C[j][i] red_i, C read off at pivots
    C = [[Fraction(b[p]) for p in pivots] for b in basis]
    Cinv = _inverse(C)
    # image_j = sum_i coords_red[j][i] red_i = sum_i (coords_red[j] Cinv)[i] basis_i
    A_cols = [[sum(cr[t] * Cinv[t][i] for t in range(len(pivots))) for i in range(len(basis))] for cr in coords_red]
    d = len(basis)
    return [[A_cols[j][i] for j in range(d)] for i in range(d)], pivots


def _inverse(m: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    d = len(m)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(d)] for i, row in enumerate(m)]
    red, piv = rref(aug)
    if piv[:d] != list(range(d)):
        raise ValueError("singular matrix")
    return [row[d:] for row in red]


def _matvec(A, x):
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def _charpoly(A) -> sympy.Poly:
    lam = sympy.Symbol("x")
    return sympy.Matrix(A).charpoly(lam)


def _eval_poly_matrix(coeffs: Sequence[int], A):
    d = len(A)
    out = [[Fraction(0)] * d for _ in range(d)]
    for c in coeffs:  # Horner, high degree first
        out = [[sum(out[i][t] * A[t][j] for t in range(d)) for j in range(d)] for i in range(d)]
        for i in range(d):
            out[i][i] += c
    return out


def good_primes(N: int, count: int) -> list[int]:
    out = []
    for p in primes_upto(max(100, 10 * count)).tolist():
        if N % p:
            out.append(p)
            if len(out) == count:
                break
    return out


def split_space(basis: Sequence[Sequence[int]], k: int, N: int, max_tries: int = 6, pivot_prec: int | None = None):
    """Pick a Hecke operator with squarefree characteristic polynomial on span(basis).

    Returns (n, A, factors) where factors is a list of integer coefficient lists
    of the monic irreducible factors. Combinations T_p + T_q are tried if no
    single T_p separates the eigenforms.
    """
    primes = good_primes(N, max_tries)
    mats = {}
    for p in primes:
        A, _ = hecke_matrix(basis, p, k, N, pivot_prec)
        mats[p] = A
        poly = _charpoly(A)
        if sympy.gcd(poly, poly.diff()).degree() == 0:
            return [p], A, _factor(poly)
    for i, p in enumerate(primes):
        for q in primes[i + 1 :]:
            A = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(mats[p], mats[q])]
            poly = _charpoly(A)
            if sympy.gcd(poly, poly.diff()).degree() == 0:
                return [p, q], A, _factor(poly)
    raise ArithmeticError("no Hecke operator with squarefree characteristic polynomial found")


def _factor(poly: sympy.Poly) -> list[list[int]]:
    _, facs = sympy.factor_list(poly.as_expr(), *poly.gens)
    out = []
    for f, mult in facs:
        fp = sympy.Poly(f, *poly.gens)
        assert mult == 1
        lc = fp.LC()
        coeffs = [sympy.Rational(c) / lc for c in fp.all_coeffs()]
        if any(c.q != 1 for c in coeffs):
            raise ArithmeticError("Hecke polynomial factor is not integral")
        out.append([int(c) for c in coeffs])
    out.sort(key=lambda c: (len(c), c))
    return out


def decompose(basis: Sequence[Sequence[int]], k: int, N: int, dps: int = 40) -> list[Orbit]:
    """Split a Hecke-stable space of newforms into Galois orbits.

    ``basis`` is a list of integer q-expansions (common precision) spanning a
    space on which the good Hecke operators act semisimply with multiplicity
    one, e.g. a new subspace or a level-one cusp space.
    """
    basis = [list(map(int, b)) for b in basis]
    if not basis:
        return []
    P = min(len(b) for b in basis) - 1
    basis = [b[: P + 1] for b in basis]
    # coefficients 0..sturm separate M_k(Gamma0(N)), hence any subspace
    pivot_prec = min(P, _sturm(k, N))
    ops, A, factors = split_space(basis, k, N, pivot_prec=pivot_prec)
    d = len(basis)
    a1 = [Fraction(b[1]) for b in basis]
    orbits = []
    for g in factors:
        r = len(g) - 1
        gA = _eval_poly_matrix(g, A)
        ker = nullspace(gA, d)
        assert len(ker) == r
        # restriction of A to the kernel, in kernel coordinates
        AW = [_matvec(A, v) for v in ker]
        B = _restrict(ker, AW)
        powers = [_identity(r)]
        for _ in range(1, r):
            powers.append(_mat_mul(powers[-1], B))
        a1_ker = [sum(a * w for a, w in zip(a1, v)) for v in ker]
        # trace form t (kernel coords): a_1(B^i t) = Tr(B^i), i < r
        rows = [[sum(a1_ker[s] * Pm[s][j] for s in range(r)) for j in range(r)] for Pm in powers]
        rhs = [sum(Pm[i][i] for i in range(r)) for Pm in powers]
        t = _solve_square(rows, rhs)
        orbit_coords = [t]
        for _ in range(1, r):
            orbit_coords.append(_matvec(B, orbit_coords[-1]))
        qexps = []
        for c in orbit_coords:
            full = [sum(c[j] * ker[j][i] for j in range(r)) for i in range(d)]
            f = _combine(basis, full, P)
            if any(x.denominator != 1 for x in f):
                raise ArithmeticError("orbit basis is not integral")
            qexps.append([int(x) for x in f])
        orbit = Orbit(dim=r, charpoly=g, operators=ops, basis=qexps)
        _embed(orbit, dps)
        orbits.append(orbit)
    return orbits


def _sturm(k, N):
    m = N
    for p in {q for q in range(2, N + 1) if N % q == 0 and all(q % r for r in range(2, q))}:
        m = m // p * (p + 1)
    return k * m // 12


def _identity(r):
    return [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]


def _mat_mul(X, Y):
    return [[sum(X[i][t] * Y[t][j] for t in range(len(Y))) for j in range(len(Y[0]))] for i in range(len(X))]


def _solve_square(rows, rhs):
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = rref(aug)
    n = len(rows)
    if piv != list(range(n)):
        raise ArithmeticError("trace-form system is singular")
    return [red[i][n] for i in range(n)]


def _restrict(ker, AW):
    """Matrix B with A ker_j = sum_i B[i][j] ker_i."""
    r = len(ker)
    d = len(ker[0])
    # columns ker_j; pick pivot coordinates to read off
    red, piv = rref(ker)
    Kp = [[ker[j][p] for p in piv] for j in range(r)]  # r x r, row j = ker_j at pivots
    Kinv = _inverse(Kp)
    B_cols = []
    for w in AW:
        wp = [w[p] for p in piv]
        # w = sum_j c_j ker_j  =>  wp = c Kp
        c = [sum(wp[t] * Kinv[t][j] for t in range(r)) for j in range(r)]
        B_cols.append(c)
    return [[B_cols[j][i] for j in range(r)] for i in range(r)]


def _embed(orbit: Orbit, dps: int) -> None:
    """Eigenvalues of the splitting operator and the normalized eigenforms, as mpf vectors.

    With u_i = T^i t (t the trace form), u_i = sum_s lambda_s^i f_s, so the
    eigenforms come from inverting a Vandermonde matrix.
    """
    r = orbit.dim
    with mpmath.workdps(dps):
        if r == 1:
            roots = [mpmath.mpf(-orbit.charpoly[1])]
        else:
            roots = mpmath.polyroots(orbit.charpoly, maxsteps=200, extraprec=4 * dps)
            if any(abs(mpmath.im(z)) > mpmath.mpf(10) ** (-dps // 2) for z in roots):
                raise ArithmeticError("non-real Hecke eigenvalue")
            roots = sorted(mpmath.re(z) for z in roots)
        V = mpmath.matrix(r, r)
        for i in range(r):
            for s in range(r):
                V[i, s] = roots[s] ** i
        Vinv = V ** -1
        orbit.eigenvalues = roots
        orbit.vinv = Vinv


def orbit_coefficients(orbit: Orbit, indices: Sequence[int], dps: int = 40, basis: Sequence[Sequence[int]] | None = None) -> list[list]:
    """Embedded a_n of each eigenform in the orbit, for n in ``indices``."""
    basis = orbit.basis if basis is None else basis
    r = orbit.dim
    with mpmath.workdps(dps):
        out = []
        for s in range(r):
            row = []
            for n in indices:
                row.append(mpmath.fsum(orbit.vinv[s, i] * basis[i][n] for i in range(r)))
            out.append(row)
        return out
