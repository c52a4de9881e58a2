from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import InsufficientPrecision, UnsupportedInput


def check_weight(k: int) -> None:
    if k % 2 or k < 4:
        raise UnsupportedInput(f"weight {k} unsupported: need an even weight >= 4")


@dataclass(frozen=True)
class QExpansion:
    """Exact q-expansion a_0 + a_1 q + ... + a_prec q^prec of a form on Gamma0(level).

    Coefficients are Fractions, except for Eisenstein series built from
    non-real characters, whose coefficients are :class:`Cyclo` numbers.
    """

    weight: int
    level: int
    coefficients: tuple
    label: str = ""

    def __post_init__(self):
        check_weight(self.weight)
        if self.level < 1:
            raise UnsupportedInput("level must be positive")
        coeffs = tuple(c if hasattr(c, "is_rational") else Fraction(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def prec(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, n: int):
        if n < 0 or n > self.prec:
            raise InsufficientPrecision(f"coefficient a_{n} beyond precision {self.prec}")
        return self.coefficients[n]

    def truncate(self, prec: int) -> "QExpansion":
        if prec > self.prec:
            raise InsufficientPrecision(f"cannot extend precision {self.prec} to {prec}")
        return QExpansion(self.weight, self.level, self.coefficients[: prec + 1], self.label)

    def scale(self, c) -> "QExpansion":
        return QExpansion(self.weight, self.level, tuple(c * a for a in self.coefficients), self.label)

    def is_integral(self) -> bool:
        return all(isinstance(a, Fraction) and a.denominator == 1 for a in self.coefficients)

    def integer_coefficients(self) -> list[int]:
        if not self.is_integral():
            raise ValueError("q-expansion has non-integral coefficients")
        return [int(a) for a in self.coefficients]


def from_ints(weight: int, level: int, coeffs: Sequence[int], label: str = "") -> QExpansion:
    return QExpansion(weight, level, tuple(Fraction(int(c)) for c in coeffs), label)


def degeneracy_lift(f: QExpansion, m: int, prec: int | None = None) -> QExpansion:
    """f(z) -> f(m z): a_n maps to a_{n m}; the level is multiplied by m."""
    if m < 1:
        raise UnsupportedInput("lift factor must be positive")
    if prec is None:
        prec = f.prec * m
    if prec // m > f.prec:
        raise InsufficientPrecision(
            f"lift by {m} to precision {prec} needs source precision {prec // m}, have {f.prec}"
        )
    zero = f.coefficients[0] * 0
    coeffs = [zero] * (prec + 1)
    for n in range(0, prec + 1, m):
        coeffs[n] = f.coefficients[n // m]
    label = f"alpha_{m}({f.label})" if f.label and m > 1 else f.label
    return QExpansion(f.weight, f.level * m, tuple(coeffs), label)
