"""Composite Gauss-Legendre rules graded toward both interval ends."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GAUSS_ORDER = 8
MAX_PANELS = 4000


class RefinementCapError(RuntimeError):
    pass


def panel_breaks(L: float, n_uniform: int, min_end: float | None = None,
                 ratio: float = 2.0) -> np.ndarray:
    """Uniform panels on [0, L] whose two end panels are split
    geometrically until the outermost piece is at most ``min_end``."""
    br = np.linspace(0.0, L, n_uniform + 1)
    H = L / n_uniform
    if min_end is None or H <= min_end:
        return br
    levels = math.ceil(math.log(H / min_end, ratio))
    inner = H / ratio ** np.arange(levels, 0, -1)  # smallest first
    left = np.concatenate(([0.0], inner))
    right = L - left[::-1]
    return np.unique(np.concatenate((left, br[1:-1], right)))


def gauss_on_breaks(breaks: np.ndarray, order: int = GAUSS_ORDER):
    t, w = np.polynomial.legendre.leggauss(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    x = (lo + half * (t[None, :] + 1.0)).ravel()
    wt = (half * w[None, :]).ravel()
    return x, wt


@dataclass(frozen=True)
class Rule1D:
    breaks: np.ndarray
    x: np.ndarray
    w: np.ndarray

    @property
    def length(self) -> float:
        return float(self.breaks[-1] - self.breaks[0])

    def integrate(self, values) -> float:
        return float(np.dot(self.w, values))


def rule_1d(L: float, max_mode: int, alpha_max: float, order: int = GAUSS_ORDER,
            panels_per_wavelength: int = 4, refine: int = 1,
            max_panels: int = MAX_PANELS) -> Rule1D:
    wavelength = 2.0 * L / max(max_mode, 1)
    n_uniform = max(4, math.ceil(panels_per_wavelength * L / wavelength)) * refine
    min_end = 1.0 / (4.0 * alpha_max) / refine if alpha_max > 0 else None
    br = panel_breaks(L, n_uniform, min_end)
    if len(br) - 1 > max_panels:
        raise RefinementCapError(
            f"{len(br) - 1} panels needed on [0, {L:g}] (cap {max_panels}); "
            "use a thicker plate or a smaller truncation")
    x, w = gauss_on_breaks(br, order)
    return Rule1D(br, x, w)


@dataclass(frozen=True)
class QuadratureRule:
    x1: Rule1D
    x2: Rule1D
    order: int

    @property
    def n_points(self) -> int:
        return self.x1.x.size * self.x2.x.size


def build_quadrature(geometry, catalog, order: int = GAUSS_ORDER,
                     panels_per_wavelength: int = 4, refine: int = 1,
                     max_panels: int = MAX_PANELS) -> QuadratureRule:
    """Tensor rule resolving every trig mode and every sinh boundary layer
    of ``catalog``. ``refine`` multiplies all panel counts."""
    ax = max(f.alpha for f in catalog.xfactors)
    ay = max(f.alpha for f in catalog.yfactors)
    kmax = max(catalog.M, catalog.N)
    r1 = rule_1d(geometry.a, kmax, ax, order, panels_per_wavelength, refine, max_panels)
    r2 = rule_1d(geometry.b, kmax, ay, order, panels_per_wavelength, refine, max_panels)
    return QuadratureRule(r1, r2, order)
