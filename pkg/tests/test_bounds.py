import math
import time

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from heckespan import bounds
from heckespan.errors import UnsupportedInput

from conftest import trial_division_primes

# frozen from the solver; re-derived below by an independent high-precision evaluation
X_4_1 = 7872108853291375324394


def _conditions_mp(X, k, M, s, e):
    """The four threshold inequalities, evaluated at 60 digits straight from their closed forms."""
    with mpmath.workdps(60):
        X = mpmath.mpf(X)
        L = mpmath.log(X)
        a1 = 2605 + 87 * k + (248 + 6 * k) * mpmath.log(M) + 1
        return [
            X >= max(6 * (k + 1) ** 2, M, mpmath.mpf("17.33")),
            X / L**4 >= 60 * k * a1**2 * (e + 1) * (s + 1) * mpmath.log(e + 3) * mpmath.log(s + 3),
            mpmath.sqrt(X) / L**2 >= max(12 * a1 * s * mpmath.log(s + 3), k * e * a1**2 + 1),
            X ** (mpmath.mpf(k) / 2) / L**2 >= 24 * k * a1 * (e + 1) * mpmath.log(e + 3),
        ]


def test_alpha():
    assert bounds.alpha_const(4, 1) == 2953
    assert bounds.alpha_const(12, 1) == 3649
    assert bounds.alpha_const(4, math.e) == pytest.approx(2953 + 272)


def test_inequalities_small_X():
    conds = bounds.thm_main_inequalities(100, bounds.BoundInput(4, 1, 0, 1))
    assert [c.ok for c in conds][0] is False
    assert conds[0].rhs == 150
    at_e = bounds.thm_main_inequalities(math.e, bounds.BoundInput(4, 1, 0, 1))
    assert not at_e[0].ok


def test_inequalities_at_1e16_match_oracle():
    inp = bounds.BoundInput(4, 1, 0, 1)
    got = [c.ok for c in bounds.thm_main_inequalities(10**16, inp)]
    assert got == _conditions_mp(10**16, 4, 1, 0, 1)
    # condition 2 fails here: 10^16 / log^4 is about 5.4e9 against 6.4e9
    assert got == [True, False, False, True]


def test_solver_k4_level1():
    inp = bounds.BoundInput(4, 1, 0, 1)
    t = time.perf_counter()
    res = bounds.solve_X_M(inp)
    assert time.perf_counter() - t < 1
    assert res.X_M == X_4_1
    assert all(_conditions_mp(res.X_M, 4, 1, 0, 1))
    assert not all(_conditions_mp(res.X_M - 1, 4, 1, 0, 1))
    assert res.binding == "condition 3"
    d = res.to_dict()
    assert d["schema"] == "heckespan.bound/1" and d["alpha"] == 2953


@pytest.mark.parametrize("k,M,s,e", [(4, 1, 0, 0), (4, 1, 1, 1), (12, 1, 1, 1), (6, 30, 5, 3), (8, 11, 3, 1)])
def test_solver_minimal_against_oracle(k, M, s, e):
    X = bounds.solve_X_M(bounds.BoundInput(k, M, s, e)).X_M
    assert all(_conditions_mp(X, k, M, s, e))
    assert not all(_conditions_mp(X - 1, k, M, s, e))


def test_condition_one_floor_is_exact():
    # when only condition 1 matters the answer is the floor itself
    inp = bounds.BoundInput(4, 1, 0, 0)
    conds = bounds.thm_main_inequalities(150, inp)
    assert conds[0].ok and not bounds.thm_main_inequalities(149, inp)[0].ok


def test_corollary():
    assert bounds.corollary_n(4, 1) == X_4_1
    n11 = bounds.corollary_n(4, 11)
    X11 = bounds.solve_X_M(bounds.BoundInput(4, 11, 2, 2)).X_M
    assert n11 == 11 * X11


def test_input_validation():
    with pytest.raises(UnsupportedInput):
        bounds.BoundInput(5, 1, 0, 1)
    with pytest.raises(UnsupportedInput):
        bounds.BoundInput(4, 12, 0, 1)


def test_lemma_catalog():
    assert bounds.lemma_rhs("gammabound", s=2 + 1j, k=4) == pytest.approx(13.18 + 4 * math.log(math.sqrt(5) + 6))
    assert bounds.lemma_rhs("Sbound", k=12, M=1) == 3639
    assert bounds.lemma_rhs("Nbound", T=1, k=4, M=1) == pytest.approx(33.5 + 8.67 * math.log(9))
    assert bounds.lemma_rhs("verticalstrip", T=2, k=4, M=6) == pytest.approx(
        103.48 + 10.87 * math.log(6) + 29.74 * math.log(11))
    with pytest.raises(UnsupportedInput):
        bounds.lemma_rhs("gammabound", s=2, k=4)
    with pytest.raises(UnsupportedInput):
        bounds.lemma_rhs("nosuchlemma")


def test_zeta_logderiv_against_mpmath():
    ratio, err = bounds.zeta_logderiv_bound(1.25)
    exact = -mpmath.zeta(1.25, derivative=1) / mpmath.zeta(1.25)
    assert abs(ratio - exact) <= err + mpmath.mpf(10) ** -15
    assert err < 1e-10
    assert bounds.lemma_rhs("vonMangoldt", sigma=1.25) == pytest.approx(4 * float(exact), rel=1e-12)


def test_gamma_factors():
    assert bounds.gamma_factor_logderiv("char", 2, 4, 0) == pytest.approx(0.5 * (-math.log(math.pi) + float(mpmath.digamma(1))))
    assert bounds.digamma_check("tensor", 2 + 1j, 12)
    with pytest.raises(UnsupportedInput):
        bounds.gamma_factor_logderiv("char", -2, 4, 0)
    # Gamma_C(s) = 2 (2 pi)^-s Gamma(s); with k = 1 the tensor factor is Gamma_C(s)^2
    s = mpmath.mpc(0.7, 3.1)
    num = mpmath.diff(lambda z: mpmath.log(2 * (2 * mpmath.pi) ** -z * mpmath.gamma(z)), s)
    assert bounds.gamma_factor_logderiv("tensor", s, 1) == pytest.approx(complex(2 * num), rel=1e-9)
    # Gamma_R(s) = pi^(-s/2) Gamma(s/2)
    numr = mpmath.diff(lambda z: mpmath.log(mpmath.pi ** (-z / 2) * mpmath.gamma(z / 2)), s + 1)
    assert bounds.gamma_factor_logderiv("char", s, 4, 1) == pytest.approx(complex(numr), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.25, 3), st.floats(1, 50), st.sampled_from([4, 12]), st.sampled_from(bounds.GAMMA_VARIANTS))
def test_digamma_property(re, im, k, variant):
    assert bounds.digamma_check(variant, complex(re, im), k)


def test_digamma_sweep():
    sw = bounds.digamma_sweep(200, seed=1)
    assert set(sw) == {"sym2", "tensor", "char0", "char1", "twist"}
    assert all(v["samples"] == 200 and not v["failures"] for v in sw.values())


def test_aux_examples():
    rep = bounds.auxbounds_check([100], [0, 1, 3], [1, 2, 6, 30])
    pi100 = [c for c in rep.checks if c.name == "pi_1k_upper" and c.params == {"X": 100, "k": 0}][0]
    assert pi100.lhs == 25 and pi100.rhs == pytest.approx(27.36, abs=0.01) and pi100.ok
    cheb = [c for c in rep.checks if c.name == "shifted_chebyshev" and c.params["m"] == 0][0]
    assert cheb.lhs == pytest.approx(sum(math.log(p) for p in trial_division_primes(100)))
    # the sum over primes only is theta(100); the prime-power sum psi(100) is 94.045
    assert cheb.lhs == pytest.approx(83.728, abs=1e-3)
    low = [c for c in rep.checks if c.name == "pi_1k_lower" and c.params == {"X": 100, "k": 3}][0]
    assert low.skipped is None  # domain X >= max(6 * 16, 17) = 96
    assert bounds.pi_1k_exact(3, 100) == sum(p**3 for p in trial_division_primes(100))
    assert rep.ok


def test_sweeps_small():
    assert bounds.pi_upper_sweep(10**4)["ok"]
    assert bounds.theta_upper_sweep(10**4)["ok"]
    dev = bounds.deviation_sweep([2, 6, 30], 4, 10**3)
    assert dev["ok"] and dev["worst"]["M=30,k=2"][0] == 4 + 9 + 25


def test_envelope_conventions():
    inp = bounds.BoundInput(4, 1, 0, 1)
    sums = {"E": 1.0, "F": 2.0, "G": 3.0, "H": 4.0, "pi": 10.0, "pi_k1": 100.0, "pi_half": 0.5}
    env = bounds.prop_determinant_envelope(1000, inp, sums)
    assert env.terms["Q"] == 0 and env.terms["mixed"] == 0
    assert env.main_term == 100.0
    zero = {**sums, "E": 0.0, "F": 0.0, "G": 0.0, "H": 0.0}
    # the mixed term still carries pi_{M,(1-k)/2} when eps and s are both positive
    env0 = bounds.prop_determinant_envelope(1000, bounds.BoundInput(12, 1, 1, 1), zero)
    assert env0.terms["Q"] == env0.terms["EFQ"] == env0.terms["EF"] == 0
    assert env0.terms["mixed"] == pytest.approx(math.log(4) ** 2 * 0.5**2)
    env00 = bounds.prop_determinant_envelope(1000, bounds.BoundInput(12, 1, 1, 1), {**zero, "pi_half": 0.0})
    assert env00.error_bound == 0 and env00.main_term > 0


def test_envelope_measured(src):
    sums = bounds.measured_sums(1, 12, 1000, src)
    env = bounds.prop_determinant_envelope(1000, bounds.BoundInput(12, 1, 1, 1), sums)
    assert env.main_term > 0 and set(env.preconditions) == {"EF", "H", "EHG"}
