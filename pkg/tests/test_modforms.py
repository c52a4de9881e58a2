import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from heckespan.arith import is_squarefree, primes_upto
from heckespan.characters import DirichletCharacter, characters_mod, primitive_characters
from heckespan.errors import (DataUnavailable, InsufficientPrecision, IngestionError, NetworkError,
                              UnsupportedInput)
from heckespan.linalg import bareiss_rank, integer_rows
from heckespan.modforms import dimensions as dims
from heckespan.modforms import eisenstein as eis
from heckespan.modforms.basis import eisenstein_pairs, full_space_basis
from heckespan.modforms.level1 import delta_coefficients, miller_basis
from heckespan.modforms.newforms import NewformRecord, hecke_check
from heckespan.modforms.qexp import QExpansion, degeneracy_lift
from heckespan.modforms.sources import (CoefficientCache, DefaultCuspSource, get_orbits, lmfdb_fetch,
                                        parse_payload, load_fixture)
from heckespan.config import PACKAGE_FIXTURES, RunConfig

from conftest import naive_delta

ONE = DirichletCharacter.principal(1)
CHI3 = DirichletCharacter.quadratic(-3)
SQUAREFREE = [n for n in range(1, 31) if is_squarefree(n)]


# --- Eisenstein series ------------------------------------------------------

@pytest.mark.parametrize("psi,phi,k,n,expected", [(ONE, ONE, 4, 2, 9), (ONE, ONE, 4, 6, 252), (ONE, CHI3, 4, 2, -7)])
def test_eisenstein_sigma(psi, phi, k, n, expected):
    assert eis.eisenstein_sigma(psi, phi, k, n) == expected


@pytest.mark.parametrize("n", range(2, 30))
def test_bernoulli_matches_sympy(n):
    assert eis.bernoulli(n) == Fraction(str(sympy.bernoulli(n)))


def _gen_bernoulli_oracle(chi, k):
    # B_{k,chi} = f^(k-1) sum_{a=1}^{f} chi(a) B_k(a/f), chi real primitive of conductor f
    x = sympy.Symbol("x")
    f = chi.modulus
    poly = sympy.bernoulli(k, x)
    total = sum(chi.real_value(a) * poly.subs(x, sympy.Rational(a, f)) for a in range(1, f + 1))
    return Fraction(str(sympy.nsimplify(total * f ** (k - 1))))


@pytest.mark.parametrize("d", [-3, -4, 5, -7, 8, 12, 13])
@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_generalized_bernoulli_real_characters(d, k):
    chi = DirichletCharacter.quadratic(d)
    assert eis.generalized_bernoulli(chi, k) == _gen_bernoulli_oracle(chi, k)


def test_generalized_bernoulli_examples():
    assert eis.generalized_bernoulli(ONE, 4) == Fraction(-1, 30)
    assert eis.generalized_bernoulli(ONE, 3) == 0
    assert eis.generalized_bernoulli(CHI3, 1) == Fraction(-1, 3)


def test_eisenstein_constants():
    e4 = eis.eisenstein_newform(eis.trivial_params(4), 2)
    assert e4.coefficients == (Fraction(1, 240), 1, 9)
    e12 = eis.eisenstein_newform(eis.trivial_params(12), 1)
    assert e12[0] == Fraction(691, 65520) and e12[1] == 1
    # direct Bernoulli route: a_0 = -B_k / (2k)
    for k in (4, 6, 8, 10, 12, 14):
        assert eis.eisenstein_newform(eis.trivial_params(k), 0)[0] == Fraction(str(-sympy.bernoulli(k))) / (2 * k)


def test_eisenstein_rejects_odd_weight():
    with pytest.raises(UnsupportedInput):
        eis.trivial_params(5)
    with pytest.raises(UnsupportedInput):
        eis.trivial_params(2)


# --- level one ----------------------------------------------------------------

def test_miller_weight12():
    f0, f1 = miller_basis(12, 4)
    assert [f1[n] for n in (1, 2, 3, 4)] == [1, -24, 252, -1472]
    assert (f0[0], f0[1], f0[2]) == (1, 0, 196560)


def test_miller_f0_is_eliminated_eisenstein():
    # E12 normalized to constant 1, minus (65520/691) Delta
    prec = 12
    c = Fraction(65520, 691)
    sig = [0] + [sum(d**11 for d in range(1, n + 1) if n % d == 0) for n in range(1, prec + 1)]
    delta = naive_delta(prec)
    oracle = [1] + [c * sig[n] - c * delta[n] for n in range(1, prec + 1)]
    assert list(miller_basis(12, prec)[0].coefficients) == oracle


def test_delta_against_product_expansion():
    assert delta_coefficients(60) == naive_delta(60)


def test_miller_weight4():
    (f,) = miller_basis(4, 1)
    assert f.coefficients == (1, 240)


def test_miller_precision_guard():
    with pytest.raises(InsufficientPrecision):
        miller_basis(24, 1)


# --- degeneracy maps ------------------------------------------------------------

def test_degeneracy_lift():
    delta = QExpansion(12, 1, naive_delta(5))
    assert degeneracy_lift(delta, 1, 5).coefficients == delta.coefficients
    d2 = degeneracy_lift(delta, 2, 5)
    assert [d2[n] for n in range(1, 6)] == [0, 1, 0, -24, 0]
    e4 = eis.eisenstein_newform(eis.trivial_params(4), 6)
    e43 = degeneracy_lift(e4, 3, 6)
    assert e43[3] == 1 and e43[0] == Fraction(1, 240)


# --- dimensions -------------------------------------------------------------------

def _brute_dims(k, N):
    """Riemann-Roch with index, cusps and elliptic points counted by brute force."""
    index = len({(a % N, b % N) for a in range(N) for b in range(N) if math.gcd(math.gcd(a, b), N) == 1}) // (
        sum(1 for u in range(N) if math.gcd(u, N) == 1)) if N > 1 else 1
    nu2 = sum(1 for x in range(N) if (x * x + 1) % N == 0)
    nu3 = sum(1 for x in range(N) if (x * x + x + 1) % N == 0)
    cusps = sum(sum(1 for u in range(math.gcd(d, N // d)) if math.gcd(u, math.gcd(d, N // d)) == 1)
                for d in range(1, N + 1) if N % d == 0)
    g = 1 + Fraction(index, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    assert g.denominator == 1
    s = (k - 1) * (int(g) - 1) + (k // 2 - 1) * cusps + nu2 * (k // 4) + nu3 * (k // 3)
    return s, cusps


def test_dimension_examples():
    assert dims.dim_cusp(4, 11) == 2 and dims.dim_eis(4, 11) == 2
    assert dims.dim_cusp(12, 1) == 1 and dims.dim_cusp(4, 1) == 0


@pytest.mark.parametrize("N", SQUAREFREE)
@pytest.mark.parametrize("k", [4, 6, 8, 12])
def test_dimensions_against_brute_force(k, N):
    assert (dims.dim_cusp(k, N), dims.dim_eis(k, N)) == _brute_dims(k, N)
    # newforms: the Eisenstein new dimension counts primitive character pairs
    assert dims.dim_eis_new(k, N) == len(eisenstein_pairs(k, N))
    assert sum(len([t for t in range(1, N // d + 1) if (N // d) % t == 0]) * dims.dim_cusp_new(k, d)
               for d in range(1, N + 1) if N % d == 0) == dims.dim_cusp(k, N)


def test_dimension_input_errors():
    with pytest.raises(UnsupportedInput):
        dims.dim_cusp(4, 12)
    with pytest.raises(UnsupportedInput):
        dims.dim_cusp(5, 11)


# --- newform records and ingestion ---------------------------------------------------

def test_hecke_check_flags_ramanujan():
    rec = NewformRecord(1, 12, "1.12.a.a", 0, {2: 3.0 * 2**5.5})
    rep = hecke_check(rec)
    assert not rep.ok and "Ramanujan" in rep.violations[0]


def test_hecke_check_multiplicativity_of_delta():
    d = naive_delta(200)
    rec = NewformRecord(1, 12, "1.12.a.a", 0, {p: float(d[p]) for p in primes_upto(200).tolist()},
                        {p: d[p] for p in primes_upto(200).tolist()}, tuple(d))
    assert hecke_check(rec).ok
    bad = list(d)
    bad[4] += 1
    assert not hecke_check(NewformRecord(1, 12, "x.12.a.a", 0, rec.ap, rec.ap_exact, tuple(bad))).ok


def test_fetch_examples(config):
    assert len(lmfdb_fetch(11, 4, config)) == 2
    (delta,) = lmfdb_fetch(1, 12, config)
    assert delta.ahat(2) == pytest.approx(-24 / 2**5.5, rel=1e-14)
    assert lmfdb_fetch(1, 4, config) == []


def test_schema_mismatch_names_field(config):
    payload = load_fixture(PACKAGE_FIXTURES, 11, 4)
    payload["orbits"][0]["embeddings"][0]["ap"][0] = "not-a-number"
    with pytest.raises(IngestionError) as e:
        parse_payload(payload, 11, 4)
    assert e.value.field == "orbits/0/embeddings/0/ap/0"


def test_network_error_is_retryable(tmp_path):
    cfg = RunConfig(cache_dir=tmp_path, db_url="http://127.0.0.1:9", offline=False)
    with pytest.raises(NetworkError) as e:
        get_orbits(11, 4, cfg)
    assert e.value.retryable and e.value.exit_code == 3


def test_missing_fixture_names_pair(tmp_path):
    cfg = RunConfig(cache_dir=tmp_path, fixtures_dir=tmp_path)
    with pytest.raises(DataUnavailable) as e:
        DefaultCuspSource(cfg).newforms(11, 4)
    assert (e.value.level, e.value.weight) == (11, 4)


def test_failed_verification_is_quarantined_not_cached(tmp_path):
    import json

    payload = load_fixture(PACKAGE_FIXTURES, 11, 4)
    payload["orbits"][0]["embeddings"][0]["ap"][0] = "1000.0"  # |a_2| / 2^1.5 > 2
    (tmp_path / "fx").mkdir()
    (tmp_path / "fx" / "newforms_11_4.json").write_text(json.dumps(payload))
    cfg = RunConfig(cache_dir=tmp_path / "cache", fixtures_dir=tmp_path / "fx")
    with pytest.raises(IngestionError):
        get_orbits(11, 4, cfg)
    cache = CoefficientCache(cfg.cache_dir)
    assert not cache.has(11, 4)
    assert "Ramanujan" in cache.quarantine_path.read_text()


def test_cache_roundtrip_and_corruption(tmp_path):
    cfg = RunConfig(cache_dir=tmp_path, fixtures_dir=PACKAGE_FIXTURES)
    first = get_orbits(11, 4, cfg)
    cache = CoefficientCache(tmp_path)
    orbits, rep = cache.read(11, 4)
    assert not rep.corrupted
    a = {r.full_label: r.ap for o in first for r in o.records}
    b = {r.full_label: r.ap for o in orbits for r in o.records}
    assert a == b
    path = cache.records_path(11, 4)
    lines = path.read_text().splitlines()
    lines[4] = lines[4][:20]
    path.write_text("\n".join(lines) + "\n")
    _, rep = cache.read(11, 4)
    assert rep.corrupted == [5]
    assert '"line": 5' in cache.quarantine_path.read_text()
    # a corrupted cache is re-ingested from the fixture
    again = get_orbits(11, 4, cfg)
    assert sum(len(o.records) for o in again) == 2


# --- fixture content ----------------------------------------------------------------------

def _eta_product(exps, prec):
    """prod eta(d z)^e as q^(sum d e / 24) times a power series."""
    c = [0] * (prec + 1)
    c[0] = 1
    for d, e in exps.items():
        for n in range(1, prec // d + 1):
            for _ in range(abs(e)):
                if e > 0:
                    for i in range(prec, d * n - 1, -1):
                        c[i] -= c[i - d * n]
                else:
                    for i in range(d * n, prec + 1):
                        c[i] += c[i - d * n]
    return c


def test_level11_weight4_span_matches_eta_construction(src):
    prec = 40
    # h = eta(z)^2 eta(11z)^2 in S_2(Gamma0(11)), times weight-2 forms h and E2(z) - 11 E2(11z)
    body = _eta_product({1: 2, 11: 2}, prec)
    h = [0] + body[:prec]
    sig = [0] + [sum(d for d in range(1, n + 1) if n % d == 0) for n in range(1, prec + 1)]
    e2 = [-10] + [-24 * sig[n] + (264 * sig[n // 11] if n % 11 == 0 else 0) for n in range(1, prec + 1)]

    def mul(a, b):
        return [sum(a[i] * b[n - i] for i in range(n + 1)) for n in range(prec + 1)]

    oracle = [mul(h, h), mul(h, e2)]
    ours = [list(f.coefficients) for f in src.new_cusp_basis(11, 4, prec)]
    assert bareiss_rank(integer_rows(oracle)) == 2
    assert bareiss_rank(integer_rows(oracle + ours)) == 2


def _hecke_tp(a, p, k, prec):
    return [a[m * p] + (p ** (k - 1) * a[m // p] if m % p == 0 else 0) for m in range(prec + 1)]


@pytest.mark.parametrize("N,k", [(11, 4), (14, 6), (15, 4), (23, 4), (30, 4), (13, 8), (22, 6)])
def test_fixture_bases_are_hecke_stable(src, N, k):
    prec = 30
    p = next(q for q in (2, 3, 5, 7) if N % q)
    forms = [list(f.coefficients) for f in src.new_cusp_basis(N, k, p * prec)]
    images = [_hecke_tp(f, p, k, prec) for f in forms]
    span = [f[: prec + 1] for f in forms]
    assert bareiss_rank(integer_rows(span)) == len(forms)
    assert bareiss_rank(integer_rows(span + images)) == len(forms)


def test_all_fixtures_ingest_and_verify(tmp_path):
    cfg = RunConfig(cache_dir=tmp_path, fixtures_dir=PACKAGE_FIXTURES)
    checked = 0
    for path in sorted(PACKAGE_FIXTURES.glob("newforms_*_*.json")):
        _, N, k = path.stem.split("_")
        orbits = get_orbits(int(N), int(k), cfg)
        assert sum(len(o.records) for o in orbits) == dims.dim_cusp_new(int(k), int(N))
        assert all(hecke_check(r).ok for o in orbits for r in o.records)
        checked += 1
    assert checked >= 60


# --- full space bases ----------------------------------------------------------------------

@pytest.mark.parametrize("k,N,count", [(4, 11, 4), (12, 1, 2), (4, 1, 1)])
def test_full_space_basis_examples(src, k, N, count):
    assert len(full_space_basis(k, N, 10, src)) == count
