"""Explicit constants: generator thresholds X_M, the lemma catalog, gamma factors, prime-sum envelopes.

Threshold comparisons are made in 128-bit interval arithmetic; a condition is
reported true or false only when the two intervals are disjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import mpmath
import numpy as np

from .arith import is_squarefree, primes_upto
from .errors import Indeterminate, UnsupportedInput
from .modforms.dimensions import dim_cusp, dim_eis, s_and_eps

BOUND_SCHEMA = "heckespan.bound/1"
CERT_PREC = 128
ST_MIN_X = 17.33


@dataclass(frozen=True)
class BoundInput:
    k: int
    M: int
    s: int
    eps: int

    def __post_init__(self):
        if self.k < 4 or self.k % 2:
            raise UnsupportedInput("weight must be even and at least 4")
        if self.M < 1 or not is_squarefree(self.M):
            raise UnsupportedInput("M must be a positive squarefree integer")
        if self.s < 0 or self.eps < 0:
            raise UnsupportedInput("s and eps must be non-negative")

    @classmethod
    def for_level(cls, k: int, M: int) -> "BoundInput":
        """s_M and eps_M summed over the new spaces of all d | M."""
        s, eps = s_and_eps(k, M)
        return cls(k, M, s, eps)


def alpha_const(k: float, M: float) -> float:
    """2605 + 87k + (248 + 6k) log M."""
    if M <= 0:
        raise UnsupportedInput("M must be positive")
    return 2605 + 87 * k + (248 + 6 * k) * math.log(M)


# ---------------------------------------------------------------------------
# the four threshold conditions

@dataclass(frozen=True)
class Condition:
    name: str
    lhs: float
    rhs: float
    ok: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "ok": self.ok}


def _conditions_iv(X, inp: BoundInput, iv):
    """(name, lhs, rhs) as intervals."""
    k, M, s, e = inp.k, inp.M, inp.s, inp.eps
    X = iv.mpf(X)
    L = iv.log(X)
    a1 = 2605 + 87 * k + (248 + 6 * k) * iv.log(iv.mpf(M)) + 1
    ls, le = iv.log(iv.mpf(s + 3)), iv.log(iv.mpf(e + 3))
    return [
        ("condition 1", X, _iv_max(iv, [6 * (k + 1) ** 2, M, iv.mpf("17.33")])),
        ("condition 2", X / L**4, 60 * k * a1**2 * (e + 1) * (s + 1) * le * ls),
        ("condition 3", iv.sqrt(X) / L**2, _iv_max(iv, [12 * a1 * s * ls, k * e * a1**2 + 1])),
        ("condition 4", X ** (iv.mpf(k) / 2) / L**2, 24 * k * a1 * (e + 1) * le),
    ]


def _iv_max(iv, xs):
    xs = [iv.mpf(x) for x in xs]
    return iv.mpf([max(x.a for x in xs), max(x.b for x in xs)])


def _decide(lhs, rhs) -> bool:
    if lhs.a >= rhs.b:
        return True
    if lhs.b < rhs.a:
        return False
    raise Indeterminate(f"cannot separate {lhs} from {rhs}")


def thm_main_inequalities(X, inp: BoundInput) -> list[Condition]:
    """The four threshold conditions at X, each decided in interval arithmetic."""
    if X <= 1:
        raise UnsupportedInput("X must exceed 1")
    iv = mpmath.iv
    saved = iv.prec
    iv.prec = CERT_PREC
    try:
        rows = _conditions_iv(X, inp, iv)
        out = []
        for name, lhs, rhs in rows:
            lhs, rhs = iv.mpf(lhs), iv.mpf(rhs)
            out.append(Condition(name, float(lhs.mid), float(rhs.mid), _decide(lhs, rhs)))
        return out
    finally:
        iv.prec = saved


def _all_ok(X, inp) -> bool:
    return all(c.ok for c in thm_main_inequalities(X, inp))


@dataclass
class BoundResult:
    input: BoundInput
    alpha: float
    X_M: int
    binding: str
    at_X: list[Condition]
    below: list[Condition]

    def to_dict(self) -> dict:
        i = self.input
        return {
            "schema": BOUND_SCHEMA,
            "k": i.k, "M": i.M, "s": i.s, "eps": i.eps,
            "alpha": self.alpha, "X_M": self.X_M, "binding": self.binding,
            "per_condition": [c.to_dict() for c in self.at_X],
            "at_X_minus_1": [c.to_dict() for c in self.below],
        }


def search_floor(inp: BoundInput) -> int:
    """Start of the monotone region: max(6(k+1)^2, M, 17.33, e^4), rounded up."""
    return math.ceil(max(6 * (inp.k + 1) ** 2, inp.M, ST_MIN_X, math.exp(4)))


def solve_X_M(inp: BoundInput) -> BoundResult:
    """Least integer X satisfying all four conditions, by doubling then bisection."""
    lo = search_floor(inp)
    if _all_ok(lo, inp):
        hi = lo
    else:
        hi = lo * 2
        while not _all_ok(hi, inp):
            lo, hi = hi, hi * 2
        # invariant: fails at lo, holds at hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _all_ok(mid, inp):
                hi = mid
            else:
                lo = mid
    at = thm_main_inequalities(hi, inp)
    below = thm_main_inequalities(hi - 1, inp)
    if not all(c.ok for c in at) or all(c.ok for c in below):
        raise ArithmeticError("threshold search lost monotonicity")
    failing = [c.name for c in below if not c.ok]
    return BoundResult(inp, alpha_const(inp.k, inp.M), hi, ", ".join(failing), at, below)


def corollary_n(k: int, N: int, cusp_dims: tuple[int, int] | None = None) -> int:
    """N * X with X the least solution for s = dim S_k(Gamma0(N)), eps = dim E_k(Gamma0(N))."""
    s, e = cusp_dims if cusp_dims is not None else (dim_cusp(k, N), dim_eis(k, N))
    return N * solve_X_M(BoundInput(k, N, s, e)).X_M


# ---------------------------------------------------------------------------
# lemma catalog

def _log(x):
    return mpmath.log(x)


def _perron_core(k, M):
    return 1230.84 + 29.15 * k + 157.84 * _log(M) + 3.78 * k * _log(M) + 60.03 * _log(k + 7.5)


def _partialperron(k, M, X):
    X = mpmath.mpf(X)
    r = mpmath.sqrt(X)
    return (33.39 + 16.68 * _log(k + 5.5) + 5.38 * _log(M)
            + r * _perron_core(k, M)
            + 0.66 * _log(r + k + 3.25)
            + r * _log(r + k + 4.5) * (291.82 + 7.55 * k + 1.67 * _log(M) + 3.34 * _log(X)))


def _perron_tail(k, M, X, ell, first, second_const):
    X, ell = mpmath.mpf(X), mpmath.mpf(ell)
    L = _log(X)
    return (X ** (ell + 0.5) * L * (first + 7.55 * k + 1.67 * _log(M) + 28.72 * L)
            + X ** (ell + 0.5) * _perron_core(k, M)
            + second_const * X**ell * L
            + X**ell * (33.39 + 16.68 * _log(k + 5.5) + 5.38 * _log(M) + 31.2 * L)
            + 4 * X ** (ell - 0.5) * L)


def zeta_logderiv_bound(sigma, terms: int = 20000) -> tuple[mpmath.mpf, mpmath.mpf]:
    """(|zeta'(sigma)| / zeta(sigma), error bound) from truncated Dirichlet series.

    The tails sum_{n >= N} n^-sigma and sum_{n >= N} n^-sigma log n are taken
    from Euler-Maclaurin through the f' term; the remainder is bounded by
    |f'''(N)| / 720 + the size of the dropped term.
    """
    sigma = mpmath.mpf(sigma)
    if sigma <= 1:
        raise UnsupportedInput("sigma must exceed 1")
    with mpmath.workprec(CERT_PREC):
        N = terms
        z = mpmath.fsum(mpmath.mpf(n) ** -sigma for n in range(1, N))
        d = mpmath.fsum(mpmath.log(n) * mpmath.mpf(n) ** -sigma for n in range(2, N))

        def f(x):
            return x**-sigma

        def g(x):
            return mpmath.log(x) * x**-sigma

        Nm = mpmath.mpf(N)
        lN = mpmath.log(Nm)
        tail_f = Nm ** (1 - sigma) / (sigma - 1) + f(Nm) / 2 - mpmath.diff(f, Nm) / 12
        tail_g = Nm ** (1 - sigma) * (lN / (sigma - 1) + 1 / (sigma - 1) ** 2) + g(Nm) / 2 - mpmath.diff(g, Nm) / 12
        rf = abs(mpmath.diff(f, Nm, 3)) / 720
        rg = abs(mpmath.diff(g, Nm, 3)) / 720
        zeta = z + tail_f
        dz = d + tail_g
        ratio = dz / zeta
        # first-order error propagation through the quotient, doubled for safety
        err = 2 * (rg / zeta + dz * rf / zeta**2)
    return ratio, err


LEMMA_ANCHORS = {
    "gammabound": "13.18 + 4 log(|s| + k + 2)",
    "Nbound": "33.5 + 4.34 log M + 8.67 log(|T| + k + 4)",
    "Nstar": "25.77 + 3.34 log M + 6.67 log(j + k + 4.5)",
    "verticalstrip": "103.48 + 10.87 log M + 29.74 log(|T| + k + 5)",
    "leftward": "40.23 + 4 log M + 8 log(|sigma| + |T| + k + 3)",
    "partialperron": "33.39 + 16.68 log(k + 5.5) + 5.38 log M + ... (X >= 4)",
    "nontruncated": "X^(l+1/2) log X (340.78 + 7.55k + ...) + ... (X >= 17.33)",
    "thetabound": "X^(l+1/2) log X (367.5 + 7.55k + ...) + ... (X >= 17.33)",
    "Sbound": "2595 + 87k + (248 + 6k) log M",
    "vonMangoldt": "4 |zeta'(sigma)| / zeta(sigma)",
}


def _need(params, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise UnsupportedInput(f"missing parameters {missing}")
    return [params[n] for n in names]


def lemma_rhs(name: str, **params) -> float:
    """Right-hand side of a catalogued lemma; parameters by keyword (s, k, M, T, j, sigma, X, ell)."""
    M = params.get("M", 1)
    if M < 1:
        raise UnsupportedInput("M must be positive")
    with mpmath.workprec(CERT_PREC):
        if name == "gammabound":
            s, k = _need(params, "s", "k")
            if complex(s).imag < 1:
                raise UnsupportedInput("gammabound needs Im(s) >= 1")
            v = 13.18 + 4 * _log(abs(mpmath.mpc(s)) + k + 2)
        elif name == "Nbound":
            T, k = _need(params, "T", "k")
            if abs(T) < 1:
                raise UnsupportedInput("Nbound needs |T| >= 1")
            v = 33.5 + 4.34 * _log(M) + 8.67 * _log(abs(T) + k + 4)
        elif name == "Nstar":
            j, k = _need(params, "j", "k")
            if j < 0 or int(j) != j:
                raise UnsupportedInput("Nstar needs a non-negative integer j")
            v = 25.77 + 3.34 * _log(M) + 6.67 * _log(j + k + 4.5)
        elif name == "verticalstrip":
            T, k = _need(params, "T", "k")
            if T < 1:
                raise UnsupportedInput("verticalstrip needs T >= 1")
            v = 103.48 + 10.87 * _log(M) + 29.74 * _log(abs(T) + k + 5)
        elif name == "leftward":
            sigma, T, k = _need(params, "sigma", "T", "k")
            if sigma > -0.25 or T < 1:
                raise UnsupportedInput("leftward needs sigma <= -1/4 and T >= 1")
            v = 40.23 + 4 * _log(M) + 8 * _log(abs(sigma) + abs(T) + k + 3)
        elif name == "partialperron":
            k, X = _need(params, "k", "X")
            if X < 4:
                raise UnsupportedInput("partialperron needs X >= 4")
            v = _partialperron(k, M, X)
        elif name in ("nontruncated", "thetabound"):
            k, X = _need(params, "k", "X")
            ell = params.get("ell", 0)
            if X < ST_MIN_X:
                raise UnsupportedInput(f"{name} needs X >= {ST_MIN_X}")
            first, second = (340.78, 31.86) if name == "nontruncated" else (367.5, 33.86)
            v = _perron_tail(k, M, X, ell, first, second)
        elif name == "Sbound":
            (k,) = _need(params, "k")
            v = 2595 + 87 * k + (248 + 6 * k) * _log(M)
        elif name == "vonMangoldt":
            (sigma,) = _need(params, "sigma")
            v = 4 * zeta_logderiv_bound(sigma)[0]
        else:
            raise UnsupportedInput(f"unknown lemma {name!r}; known: {sorted(LEMMA_ANCHORS)}")
        return float(v)


# ---------------------------------------------------------------------------
# gamma factors

GAMMA_VARIANTS = ("sym2", "tensor", "char", "twist")


def _dlog_gamma_R(s):
    return -mpmath.log(mpmath.pi) / 2 + mpmath.digamma(s / 2) / 2


def _dlog_gamma_C(s):
    return -mpmath.log(2 * mpmath.pi) + mpmath.digamma(s)


def _is_pole(z) -> bool:
    z = mpmath.mpc(z)
    return abs(z.imag) < 1e-30 and z.real <= 0 and abs(z.real - round(float(z.real))) < 1e-30


def gamma_factor_logderiv(variant: str, s, k: int, delta: int = 0) -> complex:
    """d/ds log Gamma(phi, s) for the four gamma-factor shapes."""
    s = mpmath.mpc(s)
    if variant == "sym2":
        args = [("R", s + 1), ("C", s + k - 1)]
    elif variant == "tensor":
        args = [("C", s), ("C", s + k - 1)]
    elif variant == "char":
        if delta not in (0, 1):
            raise UnsupportedInput("delta must be 0 or 1")
        args = [("R", s + delta)]
    elif variant == "twist":
        args = [("C", s + mpmath.mpf(k - 1) / 2)]
    else:
        raise UnsupportedInput(f"unknown variant {variant!r}")
    total = mpmath.mpc(0)
    for kind, z in args:
        if _is_pole(z / 2 if kind == "R" else z):
            raise UnsupportedInput(f"s = {s} is a pole of the gamma factor")
        total += _dlog_gamma_R(z) if kind == "R" else _dlog_gamma_C(z)
    return complex(total)


def digamma_check(variant: str, s, k: int, delta: int = 0) -> bool:
    """|d log Gamma(phi, s)| <= 13.18 + 4 log(|s| + k + 2), for Im(s) >= 1."""
    if complex(s).imag < 1:
        raise UnsupportedInput("the check needs Im(s) >= 1")
    return abs(gamma_factor_logderiv(variant, s, k, delta)) <= lemma_rhs("gammabound", s=s, k=k)


def digamma_sweep(n: int, seed: int, ks: Sequence[int] = (4, 12), im=(1.0, 50.0), re=(-0.25, 3.0)) -> dict:
    """Random-sample the check for each variant (char with delta 0 and 1)."""
    rng = np.random.default_rng(seed)
    shapes = [("sym2", 0), ("tensor", 0), ("char", 0), ("char", 1), ("twist", 0)]
    out = {}
    for variant, delta in shapes:
        key = variant if variant != "char" else f"char{delta}"
        fails = []
        worst = 0.0
        for _ in range(n):
            s = complex(rng.uniform(*re), rng.uniform(*im))
            k = int(rng.choice(list(ks)))
            val = abs(gamma_factor_logderiv(variant, s, k, delta))
            rhs = lemma_rhs("gammabound", s=s, k=k)
            worst = max(worst, val / rhs)
            if val > rhs:
                fails.append((s, k))
        out[key] = {"samples": n, "failures": fails, "worst_ratio": worst}
    return out


# ---------------------------------------------------------------------------
# prime-sum envelopes

def _primes_as_int(X) -> np.ndarray:
    return primes_upto(X).astype(np.int64)


def pi_1k_exact(k: int, X: float) -> int:
    return sum(int(p) ** k for p in _primes_as_int(X))


@dataclass
class AuxCheck:
    name: str
    params: dict
    lhs: float
    rhs: float
    ok: bool
    skipped: str | None = None

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class AuxReport:
    checks: list[AuxCheck] = field(default_factory=list)
    sweeps: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks if c.skipped is None) and all(v["ok"] for v in self.sweeps.values())

    def failures(self) -> list[AuxCheck]:
        return [c for c in self.checks if c.skipped is None and not c.ok]


def _lower_domain(k, M):
    return max(6 * (k + 1) ** 2, M, 17)


def auxbounds_check(X_grid: Sequence[float], k_grid: Sequence[int], M_grid: Sequence[int]) -> AuxReport:
    """The four prime-sum inequalities evaluated at every grid combination."""
    rep = AuxReport()
    for X in X_grid:
        L = math.log(X)
        for k in k_grid:
            exact = pi_1k_exact(k, X)
            c_low = 1 / (k + 1) if k == 0 else 1 / (2 * (k + 1))
            low_rhs = c_low * X ** (k + 1) / L
            skip = None if X >= _lower_domain(k, max(M_grid)) else f"X < {_lower_domain(k, max(M_grid))}"
            rep.checks.append(AuxCheck("pi_1k_lower", {"X": X, "k": k}, low_rhs, float(exact), exact >= low_rhs, skip))
            up_rhs = 1.26 * X ** (k + 1) / L
            rep.checks.append(AuxCheck("pi_1k_upper", {"X": X, "k": k}, float(exact), up_rhs, exact <= up_rhs,
                                       None if X >= 17 else "X < 17"))
            for M in M_grid:
                dev = sum(int(p) ** k for p in _primes_as_int(X) if M % int(p) == 0)
                rhs = 2.46 * math.log(M) * M**k
                rep.checks.append(AuxCheck("pi_Mk_deviation", {"X": X, "k": k, "M": M}, float(dev), rhs, dev <= rhs))
            if X >= 2:
                lhs = math.fsum(float(p) ** k * math.log(p) for p in _primes_as_int(X))
                rhs = 2.01 * X ** (k + 1)
                rep.checks.append(AuxCheck("shifted_chebyshev", {"Y": X, "m": k}, lhs, rhs, lhs <= rhs))
    return rep


def pi_upper_sweep(x_max: int = 10**6, x_min: int = 17, c: float = 1.26) -> dict:
    """pi(X) <= c X / log X for every real X in [x_min, x_max].

    pi is constant between primes while X / log X increases (X > e), so the
    worst points are X = x_min and the primes themselves.
    """
    ps = _primes_as_int(x_max)
    counts = np.arange(1, len(ps) + 1)
    mask = ps >= x_min
    xs = ps[mask].astype(np.float64)
    lhs = counts[mask]
    rhs = c * xs / np.log(xs)
    start_lhs = int(np.searchsorted(ps, x_min, side="right"))
    start_ok = start_lhs <= c * x_min / math.log(x_min)
    worst = int(np.argmax(lhs - rhs)) if len(xs) else 0
    return {
        "ok": bool(np.all(lhs <= rhs)) and start_ok,
        "points": int(mask.sum()) + 1,
        "max_ratio": float(np.max(lhs / rhs)) if len(xs) else 0.0,
        "worst_X": int(xs[worst]) if len(xs) else x_min,
    }


def theta_upper_sweep(y_max: int = 10**6, c: float = 1.01) -> dict:
    """sum_{p <= Y} log p <= c Y for every real Y in [2, y_max] (worst at primes)."""
    ps = _primes_as_int(y_max)
    logs = np.log(ps.astype(np.float64))
    theta = np.cumsum(logs)
    # cumulative float error is below 1e-9 relative here; the margin is far larger
    ratio = theta / (c * ps)
    return {"ok": bool(np.all(ratio <= 1)), "points": len(ps), "max_ratio": float(ratio.max()),
            "worst_Y": int(ps[int(np.argmax(ratio))])}


def deviation_sweep(Ms: Sequence[int], k_max: int, x_max: int) -> dict:
    """|pi_{M,k}(X) - pi_{1,k}(X)| <= 2.46 log(M) M^k for all X <= x_max, k <= k_max (exact integers)."""
    ps = [int(p) for p in _primes_as_int(x_max)]
    worst = {}
    ok = True
    for M in Ms:
        for k in range(k_max + 1):
            rhs = 2.46 * math.log(M) * M**k if M > 1 else 0.0
            dev_max = sum(p**k for p in ps if M % p == 0)  # deviation is non-decreasing in X
            ok &= dev_max <= rhs
            worst[(M, k)] = (dev_max, rhs)
    return {"ok": ok, "worst": {f"M={M},k={k}": v for (M, k), v in worst.items()}}


# ---------------------------------------------------------------------------
# determinant-sum envelope

@dataclass
class Envelope:
    main_term: float
    error_bound: float
    terms: dict
    preconditions: dict

    @property
    def all_preconditions(self) -> bool:
        return all(self.preconditions.values())

    def to_dict(self) -> dict:
        return {"main_term": self.main_term, "error_bound": self.error_bound, "terms": self.terms,
                "preconditions": self.preconditions, "within_preconditions": self.all_preconditions}


def _pw(x, n):
    """x^n with 0-th powers equal to 1 and negative powers only of non-zero bases."""
    if n == 0:
        return mpmath.mpf(1)
    return mpmath.mpf(x) ** n


def prop_determinant_envelope(X: float, inp: BoundInput, sums: Mapping[str, float]) -> Envelope:
    """Main term pi_M^s pi_{M,k-1}^eps and the four-part error bound, with the three preconditions.

    ``sums`` needs E, F, G, H, pi (= pi_M), pi_k1 (= pi_{M,k-1}) and pi_half (= pi_{M,(1-k)/2}).
    """
    E, F, G, H, P, Pk, Ph = (mpmath.mpf(sums[n]) for n in ("E", "F", "G", "H", "pi", "pi_k1", "pi_half"))
    s, e = inp.s, inp.eps
    with mpmath.workprec(CERT_PREC):
        Qs = _pw(H + P, s) - _pw(P, s) + (s * mpmath.log(s + 3) * _pw(H + P, s - 1) * H if s else 0)
        ce = e * mpmath.log(e + 3) * _pw(E + Pk, e - 1) * (E + F) if e else mpmath.mpf(0)
        t_q = _pw(Pk, e) * Qs
        t_efq = ce * Qs
        t_ef = ce * _pw(P, s)
        t_all = (e * mpmath.log(e + 3) * s * mpmath.log(s + 3) * _pw(E + Pk, e - 1) * _pw(H + P, s - 1)
                 * (Ph + G) ** 2) if (e and s) else mpmath.mpf(0)
        main = _pw(P, s) * _pw(Pk, e)
        pre = {
            "EF": bool(E + Pk >= 12 * e * (E + F)),
            "H": bool(H + P >= 12 * s * H),
            "EHG": bool((E + Pk) * (H + P) >= 6 * e * s * (Ph + G) ** 2),
        }
        terms = {"Q": float(t_q), "EFQ": float(t_efq), "EF": float(t_ef), "mixed": float(t_all)}
        return Envelope(float(main), float(t_q + t_efq + t_ef + t_all), terms, pre)


def measured_sums(M: int, k: int, X: float, cusp_source, normalized_H: bool = False) -> dict:
    """The prime sums entering the envelope, measured at X."""
    from . import stsums

    return {
        "E": stsums.E_sum(M, k, X),
        "F": stsums.F_sum(M, k, X),
        "G": stsums.G_sum(M, k, X, cusp_source),
        "H": stsums.H_sum(M, k, X, cusp_source, normalized_H),
        "pi": stsums.pi_M(M, 0, X),
        "pi_k1": stsums.pi_M(M, k - 1, X),
        "pi_half": stsums.pi_M(M, (1 - k) / 2, X),
    }
