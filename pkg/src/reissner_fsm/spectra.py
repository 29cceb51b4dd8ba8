"""Characteristic roots of the w- and psi-problems per transverse mode."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .model import DerivedConstants


class Regime(str, Enum):
    REAL_DISTINCT = "RealDistinct"
    REAL_DOUBLE = "RealDouble"
    COMPLEX_PAIR = "ComplexPair"


class DegenerateBasisError(ValueError):
    pass


def discriminant_tolerance(c: DerivedConstants) -> float:
    return 1e-9 * max(c.G_ph**2, 4.0 * c.D_h * c.k, 1.0)


def classify_regime(c: DerivedConstants) -> Regime:
    tau = discriminant_tolerance(c)
    if c.Delta_h > tau:
        return Regime.REAL_DISTINCT
    if c.Delta_h < -tau:
        return Regime.COMPLEX_PAIR
    return Regime.REAL_DOUBLE


@dataclass(frozen=True)
class WRootSet:
    """Roots of the w characteristic quartic for one wavenumber.

    ``roots`` holds ``(alpha1, alpha2)``, ``(alpha3,)`` or
    ``(alpha5, alpha6)`` depending on ``regime``.
    """

    beta: float
    regime: Regime
    roots: tuple

    @property
    def alpha_max(self) -> float:
        return max(self.roots)

    def eta(self) -> list[complex]:
        """One representative of each root family as a complex number."""
        if self.regime is Regime.COMPLEX_PAIR:
            return [complex(self.roots[0], self.roots[1])]
        return [complex(r) for r in self.roots]


@dataclass(frozen=True)
class PsiRoot:
    beta: float
    alpha7: float


def w_roots_beta(beta: float, c: DerivedConstants) -> WRootSet:
    regime = classify_regime(c)
    b2 = beta * beta
    if regime is Regime.REAL_DISTINCT:
        sq = math.sqrt(c.Delta_h)
        s1 = (c.G_ph + sq) / (2.0 * c.D_h)
        # s2 = (G_ph - sq) / (2 D_h) rewritten to avoid cancellation
        s2 = 2.0 * c.k / (c.G_ph + sq)
        return WRootSet(beta, regime, (math.sqrt(b2 + s1), math.sqrt(b2 + s2)))
    if regime is Regime.REAL_DOUBLE:
        a3 = math.sqrt(b2 + c.G_ph / (2.0 * c.D_h))
        if a3 == 0.0:
            raise DegenerateBasisError(
                "double root alpha3 = 0 (beta = 0 and G_ph = 0): the boundary "
                "profiles degenerate")
        return WRootSet(beta, regime, (a3,))
    z = cmath.sqrt(b2 + complex(c.G_ph, math.sqrt(-c.Delta_h)) / (2.0 * c.D_h))
    return WRootSet(beta, regime, (z.real, z.imag))


def w_roots(n: int, c: DerivedConstants, L: float) -> WRootSet:
    """Roots for transverse mode ``n`` on a tangential period ``L``."""
    return w_roots_beta(n * math.pi / L, c)


def psi_root(n: int, h: float, L: float) -> PsiRoot:
    beta = n * math.pi / L
    return PsiRoot(beta, math.sqrt(beta * beta + 10.0 / h**2))


def char_residual(eta, beta: float, c: DerivedConstants):
    e2 = eta * eta
    b2 = beta * beta
    return (c.D_h * e2 * e2 - (2.0 * c.D_h * b2 + c.G_ph) * e2
            + c.D_h * b2 * b2 + c.G_ph * b2 + c.k)


def relative_char_residual(eta, beta: float, c: DerivedConstants) -> float:
    scale = c.D_h * max(abs(eta), abs(beta), 1.0) ** 4
    return abs(char_residual(eta, beta, c)) / scale


def psi_char_residual(eta, beta: float, h: float):
    return eta * eta - beta * beta - 10.0 / h**2
