from fractions import Fraction

import pytest
import sympy

from heckespan import span
from heckespan.errors import DataUnavailable, InsufficientPrecision, UnsupportedInput
from heckespan.config import RunConfig
from heckespan.modforms.eisenstein import eisenstein_newform, trivial_params
from heckespan.modforms.qexp import QExpansion
from heckespan.modforms.sources import DefaultCuspSource

from conftest import naive_delta


def _e12_delta(prec):
    return [eisenstein_newform(trivial_params(12), prec), QExpansion(12, 1, naive_delta(prec))]


def test_coeff_matrix_e12_delta():
    m = span.coeff_matrix(_e12_delta(4), [1, 2])
    assert m.rows == ((1, 1), (2049, -24))
    assert span.exact_rank(m) == 2


def test_coeff_matrix_errors_and_trivial():
    e4 = eisenstein_newform(trivial_params(4), 3)
    assert span.coeff_matrix([e4], [1]).rows == ((1,),)
    with pytest.raises(InsufficientPrecision):
        span.coeff_matrix([e4], [4])


@pytest.mark.parametrize("rows,r", [([[1, 2049], [1, -24]], 2), ([[0, 0], [0, 0]], 0), ([[1, 2], [2, 4]], 1)])
def test_exact_rank(rows, r):
    assert span.exact_rank(rows) == r


@pytest.mark.parametrize("k,N,sturm,sage", [(12, 1, 1, 8), (4, 17, 6, 15), (4, 11, 4, 13), (4, 1, 0, 7)])
def test_bound_formulas(k, N, sturm, sage):
    assert span.sturm_bound(k, N) == sturm
    assert span.sage_hypothesis_bound(k, N) == sage


def test_minimal_hecke_bound_level_one(src):
    rep = span.minimal_hecke_bound(12, 1, 10, src)
    assert rep.minimal_n == 2 and rep.dim == 2 and rep.within_sage_bound
    assert span.minimal_hecke_bound(4, 1, 5, src).minimal_n == 1
    # the level-one claim floor(k/12) = 1 is recorded against the measured 2
    assert rep.level_one_claim == 1 and rep.findings


def test_minimal_hecke_bound_level_11(src):
    rep = span.minimal_hecke_bound(4, 11, 30, src)
    assert rep.dim == 4
    assert rep.minimal_n is not None and rep.minimal_n <= span.sage_hypothesis_bound(4, 11)
    # E_4(11z) has a_1 = ... = a_10 = 0, so rows a_1..a_10 cannot have full rank
    assert rep.minimal_n >= 11
    d = rep.to_dict()
    assert d["schema"] == "heckespan.span/1" and d["sage_hypothesis_bound"] == 13


def test_prime_level_finding_is_reported(src):
    # E_4(29z) vanishes to order 29 apart from a_0, forcing minimal_n >= 29 > 19
    rep = span.minimal_hecke_bound(4, 29, 40, src)
    assert rep.minimal_n == 29 and rep.sage_hypothesis_bound == 19
    assert rep.within_sage_bound is False
    assert any("COUNTEREXAMPLE" in f for f in rep.findings)
    assert rep.minimal_n_with_constant <= rep.sage_hypothesis_bound


def test_minimal_hecke_bound_missing_data(tmp_path):
    src = DefaultCuspSource(RunConfig(cache_dir=tmp_path, fixtures_dir=tmp_path))
    with pytest.raises(DataUnavailable):
        span.minimal_hecke_bound(4, 11, 20, src)


def test_theorem_generator_set():
    triples = span.theorem_generator_set(4, 1, {1: 10})
    assert span.generator_indices(triples) == [2, 3, 5, 7]
    t6 = span.theorem_generator_set(4, 6, {1: 0, 2: 5, 3: 0, 6: 0})
    assert t6 == [(9, 3, 2), (15, 5, 2)]
    with pytest.raises(UnsupportedInput):
        span.theorem_generator_set(4, 6, {1: 10, 2: 5})


def test_verify_generator_set(src):
    assert span.verify_generator_set(12, 1, [1, 2], src).full_rank
    cert = span.verify_generator_set(12, 1, [1], src)
    assert not cert.full_rank and cert.rank == 1
    assert span.verify_generator_set(4, 1, [1], src).full_rank


def test_witness_primes_level_one(src):
    tup = span.find_witness_primes(12, 1, 10, src)
    assert tup == (2, 3)
    mat = sympy.Matrix([[1 + p**11, naive_delta(3)[p]] for p in tup])
    assert mat.det() != 0
    assert span.find_witness_primes(4, 1, 10, src) == (2,)


def test_witness_primes_level_11_two_methods(src):
    exact = span.find_witness_primes(4, 11, 50, src)
    assert exact is not None and len(exact) == 3  # eps = 1 (only E_4 is new), s = 2
    assert span.find_witness_primes(4, 11, 50, src, method="interval") == exact
    # independent check with the exact cusp basis and sympy
    basis = src.new_cusp_basis(11, 4, 50)
    mat = sympy.Matrix([[1 + p**3] + [int(f[p]) for f in basis] for p in exact])
    assert mat.det() != 0


def test_witness_primes_none_when_too_few(src):
    assert span.find_witness_primes(12, 1, 2, src) is None
