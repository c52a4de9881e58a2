#!/usr/bin/env python3
"""Build newform fixture files for squarefree levels N <= 30.

For each (N, k) a basis of M_k(Gamma0(N)) is assembled from a pool of
explicit forms (weight-2 Eisenstein differences, eta quotients, lifts from
lower levels, products of these, Hecke images as a fallback), checked to
have full rank on coefficients a_0..a_B with B the Sturm bound. The new
cuspidal subspace is cut out as the common kernel of U_p^2 - p^(k-2) over
p | N, then split into Galois orbits with the library's decomposition tool.

Usage: scripts/make_fixtures.py [--levels 11,13] [--weights 4,6] [--out DIR]
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import mpmath

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from heckespan.arith import divisors, euler_phi, is_squarefree, moebius, prime_divisors, primes_upto, sigma_table  # noqa: E402
from heckespan.characters import Cyclo, DirichletCharacter, primitive_characters  # noqa: E402
from heckespan.modforms.eisenstein import l_value_negative  # noqa: E402
from heckespan.linalg import independent_columns_modp, nullspace  # noqa: E402
from heckespan.modforms.dimensions import dim_cusp_new, dim_modular  # noqa: E402
from heckespan.modforms.hecke import decompose, hecke_operator, orbit_coefficients, primitive_integral  # noqa: E402
from heckespan.modforms.level1 import _miller_ints, dim_level_one  # noqa: E402
from heckespan.modforms.series import eta_product_series, mul_int  # noqa: E402
from heckespan.span import sturm_bound  # noqa: E402

SCHEMA = "heckespan.newforms/1"
DPS = 40


class PoolForm:
    """An integral q-expansion that can be recomputed to any precision."""

    def __init__(self, name, fn, explicit=True):
        self.name = name
        self.fn = fn
        self.explicit = explicit
        self._prec = -1
        self._coeffs = None

    def get(self, prec):
        if prec > self._prec:
            self._coeffs = self.fn(prec)
            self._prec = prec
        return self._coeffs[: prec + 1]

    def drop(self):
        self._prec, self._coeffs = -1, None


def e2_diff(t):
    def fn(P):
        s = sigma_table(1, P)
        e2 = [1] + [-24 * x for x in s[1:]]
        out = [(1 - t) if n == 0 else e2[n] for n in range(P + 1)]
        for n in range(1, P // t + 1):
            out[n * t] -= t * e2[n]
        return out

    return PoolForm(f"E2[{t}]", fn)


def eta_form(exps):
    shift = sum(d * r for d, r in exps.items()) // 24

    def fn(P):
        if P < shift:
            return [0] * (P + 1)
        _, c = eta_product_series(exps, P - shift)
        return [0] * shift + c

    name = "eta[" + ",".join(f"{d}^{r}" for d, r in sorted(exps.items()) if r) + "]"
    return PoolForm(name, fn)


def product(a, b):
    return PoolForm(f"{a.name}*{b.name}", lambda P: mul_int(a.get(P), b.get(P), P), a.explicit and b.explicit)


def lift(f, t):
    if t == 1:
        return f

    def fn(P):
        src = f.get(P // t)
        out = [0] * (P + 1)
        for n, c in enumerate(src):
            out[n * t] = c
        return out

    return PoolForm(f"{f.name}|{t}", fn, f.explicit)


def hecke_image(f, n, k, N):
    return PoolForm(f"T{n}({f.name})", lambda P: hecke_operator(f.get(n * P), n, k, N, P), False)


def _ramanujan_sum(n, r):
    g = math.gcd(n, r % n) if r % n else n
    return sum(moebius(n // d) * d for d in divisors(g))


def char_eisenstein(chi, l, side, P):
    """D * E_l^{chi,1} (side "psi") or D * E_l^{1,chi} (side "phi") as sum_j zeta_n^j comps[j]."""
    n = chi.order
    comps = [[0] * (P + 1) for _ in range(n)]
    expo = {}
    for a in range(1, P + 1):
        t = chi.angle(a)
        expo[a] = None if t is None else int(t * n)
    for a in range(1, P + 1):
        for b in range(1, P // a + 1):
            j = expo[a] if side == "psi" else expo[b]
            if j is not None:
                comps[j][a * b] += b ** (l - 1)
    if l == 1 or side == "phi":
        const = l_value_negative(chi, l) * Fraction(1, 2)
    else:
        const = Fraction(0)
    if isinstance(const, Cyclo):
        poly = list(const.lift_to(n).c) if const.n != n else list(const.c)
    else:
        poly = [Fraction(const)]
    den = 1
    for c in poly:
        den = den * c.denominator // math.gcd(den, c.denominator)
    scaled = [[den * x for x in comp] for comp in comps]
    for j, c in enumerate(poly):
        scaled[j % n][0] += int(c * den)
    return n, scaled


_CHAR_CACHE = {}


def char_products(chi, l, k, P):
    key = (chi.modulus, chi.exponents, l, k, P)
    if key not in _CHAR_CACHE:
        if len(_CHAR_CACHE) > 8:
            _CHAR_CACHE.clear()
        _CHAR_CACHE[key] = _char_products(chi, l, k, P)
    return _CHAR_CACHE[key]


def _char_products(chi, l, k, P):
    """Rational traces Tr(zeta^m X Y) with X of weight l and nebentypus chi, Y of weight k - l and conj(chi)."""
    out = []
    for sx in ("psi", "phi"):
        for sy in ("psi", "phi"):
            if l == 1 and sx == "phi" or k - l == 1 and sy == "phi":
                continue
            n, A = char_eisenstein(chi, l, sx, P)
            _, B = char_eisenstein(chi.conjugate(), k - l, sy, P)
            prods = {}
            for i in range(n):
                for j in range(n):
                    if any(A[i]) and any(B[j]):
                        prods[(i, j)] = mul_int(A[i], B[j], P)
            for m in range(euler_phi(n)):
                acc = [0] * (P + 1)
                for (i, j), pr in prods.items():
                    c = _ramanujan_sum(n, i + j + m)
                    if c:
                        acc = [x + c * y for x, y in zip(acc, pr)]
                if any(acc):
                    out.append(acc)
    return out


def char_pool(N, k):
    """Traced products of Eisenstein series with conjugate characters of conductor dividing N."""
    forms = []
    for f in divisors(N):
        if f == 1:
            continue
        seen = set()
        for chi in primitive_characters(f):
            key = frozenset(chi_a.exponents for chi_a in _galois_orbit(chi))
            if key in seen:
                continue
            seen.add(key)
            for l in range(1, k):
                if (chi.parity() + l) % 2:
                    continue
                for idx in range(64):
                    def fn(P, chi=chi, l=l, idx=idx):
                        vals = char_products(chi, l, k, P)
                        return vals[idx] if idx < len(vals) else [0] * (P + 1)
                    if idx >= len(char_products(chi, l, k, 4)):
                        break
                    base = PoolForm(f"Echi[{f},{chi.exponents},{l},{idx}]", fn)
                    for t in divisors(N // f):
                        forms.append(lift(base, t))
    return forms


def _galois_orbit(chi):
    n = chi.order
    out = []
    c = chi
    for a in range(1, n + 1):
        if math.gcd(a, n) == 1:
            out.append(DirichletCharacter(chi.modulus, tuple(e * a for e in chi.exponents)))
    return out


def level_one_form(k, j):
    return PoolForm(f"miller{k}_{j}", lambda P: list(_miller_ints(k, P)[j]))


def eta_quotients(N, weight, bound):
    """Exponent vectors of holomorphic eta quotients of the given weight on Gamma0(N), trivial character."""
    divs = divisors(N)
    out = []
    rng = range(-bound, bound + 1)
    for head in itertools.product(rng, repeat=len(divs) - 1):
        last = 2 * weight - sum(head)
        if abs(last) > bound:
            continue
        r = dict(zip(divs, list(head) + [last]))
        if sum(d * x for d, x in r.items()) % 24 or sum((N // d) * x for d, x in r.items()) % 24:
            continue
        prod = Fraction(1)
        for d, x in r.items():
            prod *= Fraction(d) ** x
        if not (_is_square(prod.numerator) and _is_square(prod.denominator)):
            continue
        # order at the cusp attached to c | N (squarefree level)
        if all(sum(math.gcd(c, d) ** 2 * x / d for d, x in r.items()) >= 0 for c in divs):
            out.append({d: x for d, x in r.items() if x})
    return out


def _is_square(n):
    return n >= 0 and math.isqrt(n) ** 2 == n


class Builder:
    def __init__(self, verbose=True):
        self.bases = {}  # (N, k) -> list of PoolForm spanning M_k(Gamma0(N))
        self.verbose = verbose

    def log(self, *a):
        if self.verbose:
            print(*a, flush=True)

    def weight2(self, N):
        forms = [e2_diff(t) for t in divisors(N) if t > 1]
        if len(divisors(N)) <= 4:
            forms += [eta_form(e) for e in eta_quotients(N, 2, 8)]
        return forms

    def pool(self, N, k):
        pool = []
        for d in divisors(N):
            if d == N:
                continue
            for f in self.basis(d, k):
                for t in divisors(N // d):
                    pool.append(lift(f, t))
        w2 = self.weight2(N)
        if k == 4:
            pool += [product(a, b) for a, b in itertools.combinations_with_replacement(w2, 2)]
        elif k == 6:
            pool += [product(a, b) for a in w2 for b in self.basis(N, 4)]
        elif k == 8:
            pool += [product(a, b) for a, b in itertools.combinations_with_replacement(self.basis(N, 4), 2)]
        else:
            pool += [product(a, b) for a in self.basis(N, 4) for b in self.basis(N, k - 4)]
        if len(divisors(N)) <= 4:
            pool += [eta_form(e) for e in eta_quotients(N, k, 2 * k)]
        return pool

    def basis(self, N, k):
        key = (N, k)
        if key in self.bases:
            return self.bases[key]
        if N == 1:
            b = [level_one_form(k, j) for j in range(dim_level_one(k))]
            self.bases[key] = b
            return b
        dim = dim_modular(k, N)
        B = sturm_bound(k, N)
        pool = self.pool(N, k)
        chosen = _select(pool, B, dim)
        if len(chosen) < dim:
            pool = pool + char_pool(N, k)
            chosen = _select(pool, B, dim)
        if len(chosen) < dim:
            extra = []
            ops = [n for n in range(2, 12) if all(n % p for p in prime_divisors(N)) or n in prime_divisors(N)]
            for f in list(pool):
                for n in ops:
                    extra.append(hecke_image(f, n, k, N))
            chosen = _select(pool + extra, B, dim)
        if len(chosen) < dim:
            raise RuntimeError(f"pool rank {len(chosen)} < dim {dim} for N={N}, k={k}")
        self.log(f"  M_{k}({N}): dim {dim}, pool {len(pool)}, basis uses {[f.name for f in chosen][:3]}...")
        self.bases[key] = chosen
        return chosen


def _select(pool, B, dim):
    cols = [f.get(B) for f in pool]
    idx = independent_columns_modp(cols, target=dim)
    return [pool[i] for i in idx]


def new_subspace(basis, N, k, W):
    """Integer q-expansions (precision W) spanning S_k^new(Gamma0(N))."""
    B = sturm_bound(k, N)
    coeffs = [f.get(W) for f in basis]
    rows = []
    for p in prime_divisors(N):
        c = p ** (k - 2)
        for n in range(B + 1):
            rows.append([f[n * p * p] - c * f[n] for f in coeffs])
    ker = nullspace(rows, len(basis))
    out = []
    for v in ker:
        v = primitive_integral(v)
        out.append([sum(c * f[i] for c, f in zip(v, coeffs) if c) for i in range(W + 1)])
    return out


def build_record(builder, N, k, ap_max, basis_prec):
    t0 = time.time()
    dnew = dim_cusp_new(k, N)
    B = sturm_bound(k, N)
    primes_N = prime_divisors(N)
    need = max([p * p * (B + 1) for p in primes_N] + [20 * (B + 1), ap_max, basis_prec])
    orbits_out = []
    if dnew:
        if N == 1:
            newb = [list(x) for x in _miller_ints(k, need)[1:]]
        else:
            basis = builder.basis(N, k)
            newb = new_subspace(basis, N, k, need)
        if len(newb) != dnew:
            raise RuntimeError(f"new subspace dim {len(newb)} != {dnew} for N={N}, k={k}")
        orbits = decompose(newb, k, N, dps=DPS)
        primes = [p for p in primes_upto(ap_max).tolist()]
        data = []
        for o in orbits:
            emb = orbit_coefficients(o, primes, dps=DPS)
            traces = [int(o.basis[0][p]) for p in primes[:25]]
            data.append((o, emb, traces))
        data.sort(key=lambda t: (t[0].dim, t[2]))
        for idx, (o, emb, traces) in enumerate(data):
            label = f"{N}.{k}.a.{_letters(idx)}"
            rec = {
                "label": label,
                "dim": o.dim,
                "hecke_operator": o.operators,
                "hecke_charpoly": [str(c) for c in o.charpoly],
                "primes": primes,
                "embeddings": [
                    {"index": s, "ap": [mpmath.nstr(x, 25, min_fixed=-mpmath.inf, max_fixed=mpmath.inf) for x in row]}
                    for s, row in enumerate(emb)
                ],
                "basis": [[str(c) for c in b[: basis_prec + 1]] for b in o.basis],
            }
            if o.dim == 1:
                rec["ap_exact"] = [str(int(mpmath.nint(x))) for x in emb[0]]
            orbits_out.append(rec)
    for f in builder.bases.get((N, k), []):
        f.drop()
    builder.log(f"({N},{k}): new dim {dnew}, orbits {[o['dim'] for o in orbits_out]}, {time.time() - t0:.1f}s")
    return {
        "schema": SCHEMA,
        "level": N,
        "weight": k,
        "newspace_dim": dnew,
        "orbits": orbits_out,
        "source": "local-eisenstein-products",
        "generated": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def _letters(i):
    s = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        s = chr(97 + r) + s
    return s


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", default=",".join(str(n) for n in range(1, 31) if is_squarefree(n)))
    ap.add_argument("--weights", default="4,6,8,12")
    ap.add_argument("--ap-max", type=int, default=1000)
    ap.add_argument("--basis-prec", type=int, default=400)
    ap.add_argument("--big", default="11:4:100000:2000", help="N:k:ap_max:basis_prec overrides, comma separated")
    ap.add_argument("--out", default=str(ROOT / "src" / "heckespan" / "data" / "fixtures"))
    args = ap.parse_args(argv)
    overrides = {}
    for item in filter(None, args.big.split(",")):
        n, k, a, b = map(int, item.split(":"))
        overrides[(n, k)] = (a, b)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    builder = Builder()
    for k in map(int, args.weights.split(",")):
        for N in map(int, args.levels.split(",")):
            apm, bp = overrides.get((N, k), (args.ap_max, args.basis_prec))
            rec = build_record(builder, N, k, apm, bp)
            path = out / f"newforms_{N}_{k}.json"
            path.write_text(json.dumps(rec, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
