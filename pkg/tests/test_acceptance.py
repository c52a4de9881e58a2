"""Acceptance suite: one PASS/FAIL line per criterion, printed live and in the terminal summary."""

import math
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import sympy

from heckespan import bounds, detsum, span, stsums
from heckespan.arith import is_squarefree
from heckespan.characters import DirichletCharacter
from heckespan.linalg import bareiss_rank
from heckespan.modforms import dimensions as dims
from heckespan.modforms import eisenstein as eis
from heckespan.modforms.basis import full_space_basis
from heckespan.modforms.level1 import delta_coefficients, miller_basis

from conftest import ACCEPTANCE, naive_delta

sys.path.insert(0, str(__import__("pathlib").Path(__file__).resolve().parents[1] / "scripts"))
import hecke_survey  # noqa: E402

SQUAREFREE = [n for n in range(1, 31) if is_squarefree(n)]
WEIGHTS = (4, 6, 8, 12)


@contextmanager
def criterion(n: int, title: str):
    notes: list[str] = []
    try:
        yield notes
    except BaseException as e:
        line = f"AC{n:02d} FAIL  {title}: {type(e).__name__}: {e}"
        ACCEPTANCE.append(line)
        print("\n" + line, file=sys.__stdout__)
        raise
    line = f"AC{n:02d} PASS  {title}" + (f" ({'; '.join(notes)})" if notes else "")
    ACCEPTANCE.append(line)
    print("\n" + line, file=sys.__stdout__)


def test_ac01_miller_golden_values():
    with criterion(1, "Miller basis golden values") as notes:
        t = time.perf_counter()
        f0, f1 = miller_basis(12, 30)
        elapsed = time.perf_counter() - t
        assert [f1[n] for n in (2, 3, 4)] == [-24, 252, -1472]
        assert f0[2] == 196560
        # oracle: product expansion of Delta, and E12 with its Delta multiple eliminated
        delta = naive_delta(30)
        assert list(f1.coefficients) == delta
        c = Fraction(65520, 691)
        sig = [sum(d**11 for d in range(1, n + 1) if n % d == 0) for n in range(31)]
        assert list(f0.coefficients) == [1] + [c * (sig[n] - delta[n]) for n in range(1, 31)]
        assert delta_coefficients(30) == delta
        assert elapsed < 1
        notes.append(f"{elapsed:.3f}s")


def test_ac02_eisenstein_constants():
    with criterion(2, "Eisenstein constant terms") as notes:
        e4 = eis.eisenstein_newform(eis.trivial_params(4), 0)[0]
        e12 = eis.eisenstein_newform(eis.trivial_params(12), 0)[0]
        assert e4 == Fraction(1, 240) and e12 == Fraction(691, 65520)
        one = DirichletCharacter.principal(1)
        for k, v in ((4, e4), (12, e12)):
            direct = -Fraction(str(sympy.bernoulli(k))) / (2 * k)
            assert v == direct == -Fraction(eis.generalized_bernoulli(one, k)) / (2 * k)
        notes.append("1/240, 691/65520")


def test_ac03_dimensions_and_bases(src):
    with criterion(3, "dimension cross-checks and full-space bases") as notes:
        assert dims.dim_cusp(4, 11) == 2 and dims.dim_eis(4, 11) == 2
        assert dims.dim_cusp(12, 1) == 1 and dims.dim_cusp(4, 1) == 0
        for N in SQUAREFREE:
            for k in WEIGHTS:
                prec = span.sturm_bound(k, N) + 1
                basis = full_space_basis(k, N, prec, src)
                d = dims.dim_modular(k, N)
                assert len(basis) == d, (N, k)
                rows = [[Fraction(f[n]) for f in basis] for n in range(prec + 1)]
                assert bareiss_rank(rows) == d, (N, k)
        notes.append(f"{len(SQUAREFREE) * len(WEIGHTS)} spaces, exact rank on a_0..a_sturm")


def test_ac04_empirical_hecke_bound(src, tmp_path):
    with criterion(4, "empirical Hecke bound survey") as notes:
        assert span.minimal_hecke_bound(12, 1, 10, src).minimal_n == 2
        rep = hecke_survey.survey(SQUAREFREE, WEIGHTS, src)
        assert len(rep["rows"]) + len(rep["unavailable"]) == len(SQUAREFREE) * len(WEIGHTS)
        assert all(r["minimal_n"] is not None for r in rep["rows"])
        bad = [r for r in rep["rows"] if r["within_sage_bound"] is False]
        # every violation is carried as a finding in the report
        assert len(rep["findings"]) >= len(bad) == rep["violations"]
        assert all(any("COUNTEREXAMPLE" in f["finding"] for f in rep["findings"]
                       if (f["level"], f["weight"]) == (r["level"], r["weight"])) for r in bad)
        notes.append(f"{len(rep['rows'])} spaces, {len(bad)} findings reported")


def test_ac05_solver():
    with criterion(5, "main-theorem solver") as notes:
        inp = bounds.BoundInput(4, 1, 0, 1)
        t = time.perf_counter()
        res = bounds.solve_X_M(inp)
        elapsed = time.perf_counter() - t
        assert all(c.ok for c in bounds.thm_main_inequalities(res.X_M, inp))
        assert not all(c.ok for c in bounds.thm_main_inequalities(res.X_M - 1, inp))
        assert bounds.search_floor(inp) == 150 == 6 * (4 + 1) ** 2
        zero = bounds.BoundInput(4, 1, 0, 0)
        assert bounds.thm_main_inequalities(150, zero)[0].ok
        assert not bounds.thm_main_inequalities(149, zero)[0].ok
        assert elapsed < 1
        notes.append(f"X_M = {res.X_M}, {elapsed:.3f}s")


def test_ac06_auxiliary_grid():
    with criterion(6, "prime-counting grid to 10^6") as notes:
        t = time.perf_counter()
        assert bounds.pi_upper_sweep(10**6, 17, 1.26)["ok"]
        assert bounds.theta_upper_sweep(10**6, 1.01)["ok"]
        assert bounds.deviation_sweep([2, 6, 30], 4, 10**5)["ok"]
        elapsed = time.perf_counter() - t
        assert elapsed < 60
        notes.append(f"{elapsed:.2f}s")


def test_ac07_sato_tate_slack(src):
    with criterion(7, "effective Sato-Tate slack") as notes:
        worst = 0.0
        for M, k in ((1, 12), (11, 4)):
            for X in (10**3, 10**4, 10**5):
                rep = stsums.check_effectiveST(M, k, X, src)
                assert set(rep.ratios) == {"F", "G", "H", "H_normalized"}
                assert all(r < 1e-2 for r in rep.ratios.values()), (M, k, X, rep.ratios)
                worst = max(worst, *rep.ratios.values())
        notes.append(f"(1,12) and (11,4), max ratio {worst:.2e}")


def test_ac08_psi_theta_gap(src):
    with criterion(8, "psi - theta prime-power bound") as notes:
        X_max = 10**5
        delta = src.newforms(1, 12, ap_max=X_max)[0]
        phis = (stsums.char(DirichletCharacter.quadratic(-3)), stsums.sym2(delta))
        for X in (10**2, 10**3, 10**4, X_max):
            tail = stsums.prime_power_tail(0, X)
            for phi in phis:
                gap = abs(stsums.psi_phi(phi, X).value - stsums.theta_phi(phi, X).value)
                assert gap <= tail + 1e-9, (phi.kind, X, gap, tail)
        notes.append("Char(chi_-3), Sym^2 Delta at 10^2..10^5")


def test_ac09_determinant_bookkeeping(src):
    with criterion(9, "determinant bookkeeping") as notes:
        X = 20
        widths = set()
        for k, M in ((4, 1), (12, 1), (4, 5), (12, 3), (6, 6), (4, 10)):
            spec = detsum.block_spec(k, M, src)
            assert spec.rational and spec.m <= 3
            assert detsum.det_square_sum(spec, X).exact == detsum.pair_expansion_sum(spec, X)
            widths.add(spec.m)
        assert widths == {1, 2, 3}
        for k, M, e, s in ((4, 1, 1, 0), (12, 1, 1, 1)):
            spec = detsum.block_spec(k, M, src)
            assert (spec.eps, spec.s) == (e, s)
            assert detsum.det_square_sum(spec, X).value > 0
        notes.append("m = 1, 2, 3 exact; both specs positive")


def test_ac10_combinatorics():
    with criterion(10, "rencontres and pair counts") as notes:
        for ell in range(11):
            assert sum(detsum.rencontres(ell, g) for g in range(ell + 1)) == math.factorial(ell)
        comps = detsum.compare_eq_pairs(7)
        assert comps and {c.d for c in comps} == set(range(8))
        disagree = [c for c in comps if not c.agree]
        for c in disagree:
            assert c.discrepancies()
        cases = detsum.combinatorial_estimate_check()
        hit = [c for c in cases if c.estimate == "first-literal" and c.params == {"ell": 1, "T": 12}]
        assert hit and hit[0].ok is False
        notes.append(f"{len(disagree)} formula discrepancies reported; literal estimate fails at (1, 12)")


def test_ac11_digamma():
    with criterion(11, "gamma-factor log-derivative bound") as notes:
        sw = bounds.digamma_sweep(200, seed=1, ks=(4, 12), im=(1.0, 50.0))
        assert sw and all(v["samples"] == 200 and not v["failures"] for v in sw.values())
        notes.append(f"{len(sw)} variants x 200 samples")
