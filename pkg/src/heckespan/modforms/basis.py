"""Bases of M_k(Gamma0(N)) assembled from newforms and degeneracy lifts."""

from __future__ import annotations

from ..arith import divisors
from ..characters import primitive_characters, DirichletCharacter
from ..errors import DataUnavailable
from .dimensions import _check, dim_cusp_new, dim_modular
from .eisenstein import EisensteinParams, eisenstein_newform
from .qexp import QExpansion, degeneracy_lift


def eisenstein_pairs(k: int, d: int) -> list[EisensteinParams]:
    """Pairs (psi, phi) of primitive characters with cond(psi) cond(phi) = d, psi phi principal, parity of k."""
    out = []
    for a in divisors(d):
        b = d // a
        psis = [DirichletCharacter.principal(1)] if a == 1 else primitive_characters(a)
        phis = [DirichletCharacter.principal(1)] if b == 1 else primitive_characters(b)
        for psi in psis:
            for phi in phis:
                if (psi.parity() + phi.parity() + k) % 2:
                    continue
                if not (psi.extend(d) * phi.extend(d)).is_principal:
                    continue
                out.append(EisensteinParams(psi, phi, k))
    return out


def eisenstein_new_basis(k: int, d: int, prec: int) -> list[QExpansion]:
    return [eisenstein_newform(p, prec) for p in eisenstein_pairs(k, d)]


def full_space_basis(k: int, N: int, prec: int, cusp_source) -> list[QExpansion]:
    """alpha_t of every Eisenstein and cusp newform of level M | N, t | N/M."""
    _check(k, N)
    out = []
    for M in divisors(N):
        new = eisenstein_new_basis(k, M, prec)
        if dim_cusp_new(k, M):
            forms = cusp_source.new_cusp_basis(M, k, prec)
            if len(forms) != dim_cusp_new(k, M):
                raise DataUnavailable(M, k, f"source returned {len(forms)} forms, expected {dim_cusp_new(k, M)}")
            new += forms
        for t in divisors(N // M):
            out += [degeneracy_lift(f, t, prec) for f in new]
    if len(out) != dim_modular(k, N):
        raise ArithmeticError(f"assembled {len(out)} forms for dim M_{k}(Gamma0({N})) = {dim_modular(k, N)}")
    return [QExpansion(f.weight, N, f.coefficients, f.label) for f in out]
