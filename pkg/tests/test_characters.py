import cmath

import pytest
from hypothesis import given, settings, strategies as st

from heckespan.arith import euler_phi
from heckespan.characters import DirichletCharacter, characters_mod, primitive_characters


def test_trivial_modulus():
    chars = characters_mod(1)
    assert len(chars) == 1 and chars[0].is_principal and chars[0].conductor == 1


def test_mod5_conductors():
    conds = sorted(c.conductor for c in characters_mod(5))
    assert conds == [1, 5, 5, 5]


def test_quadratic_mod3():
    chi = DirichletCharacter.quadratic(-3)
    assert chi.real_value(2) == -1 and chi.real_value(1) == 1 and chi.real_value(3) == 0


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5, 8, 12, 15, 30])
def test_counts_and_orthogonality(q):
    chars = characters_mod(q)
    assert len(chars) == euler_phi(q)
    for chi in chars:
        total = sum(chi(a) for a in range(q))
        assert abs(total - (euler_phi(q) if chi.is_principal else 0)) < 1e-9


@pytest.mark.parametrize("q", [3, 5, 7, 15, 21, 30])
def test_primitive_count(q):
    # number of primitive characters mod squarefree q is prod (p - 2)
    from heckespan.arith import prime_divisors

    expected = 1
    for p in prime_divisors(q):
        expected *= p - 2
    assert len(primitive_characters(q)) == expected


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([5, 7, 12, 15, 21, 30]), st.integers(1, 200), st.integers(1, 200))
def test_completely_multiplicative(q, a, b):
    for chi in characters_mod(q):
        assert cmath.isclose(chi(a * b), chi(a) * chi(b), abs_tol=1e-12)


def test_parity_and_real():
    chi = DirichletCharacter.quadratic(-3)
    assert chi.is_real and chi.parity() == 1
    assert abs(chi(-1 % 3) + 1) < 1e-12
