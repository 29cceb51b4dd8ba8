"""Basis functions of the composite series and their derivatives.

Every basis function is separable, ``X(x1) * Y(x2)``, so the catalog
stores one 1D factor per direction and evaluates derivative tables of the
factors on arbitrary node sets. Sinh-type factors are evaluated through
exponential differences and never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from . import kernels
from .model import DerivedConstants, ModelSpec
from .spectra import PsiRoot, Regime, WRootSet, psi_root, w_roots

DMAX = 4
# below this |sin(alpha6 L)| the oscillatory profiles become dependent
COMPLEX_DEGENERACY = 0.1

W_FAMILIES = ("CornerW", "InternalW", "BoundaryW_x1", "BoundaryW_x2")
PSI_FAMILIES = ("BoundaryPsi_x1", "BoundaryPsi_x2")


def corner_poly(i: int, x, L: float, d: int = 0):
    """d-th derivative of the corner interpolant g_i on [0, L].

    g_1, g_2 carry end values (g_1(0) = 1, g_2(L) = 1); g_3, g_4 vanish at
    both ends and carry unit curvature at x = 0 and x = L respectively.
    """
    if d > DMAX or d < 0:
        raise ValueError(f"derivative order {d} outside 0..{DMAX}")
    x = np.asarray(x, dtype=float)
    t = x / L
    if i == 1:
        return 1.0 - t if d == 0 else (np.full_like(t, -1.0 / L) if d == 1 else np.zeros_like(t))
    if i == 2:
        return t.copy() if d == 0 else (np.full_like(t, 1.0 / L) if d == 1 else np.zeros_like(t))
    if i == 3:
        return L ** (2 - d) * _cubic(t, d)
    if i == 4:
        return L ** (2 - d) * (-1.0) ** d * _cubic(1.0 - t, d)
    raise ValueError(f"corner index must be 1..4, got {i}")


def _cubic(t, d):
    # -t(t-1)(t-2)/6 and its derivatives in t
    if d == 0:
        return -t**3 / 6.0 + t**2 / 2.0 - t / 3.0
    if d == 1:
        return -t**2 / 2.0 + t - 1.0 / 3.0
    if d == 2:
        return 1.0 - t
    if d == 3:
        return np.full_like(t, -1.0)
    return np.zeros_like(t)


def _sinh_table(alpha, x, L, dmax, reflect=False):
    if reflect:
        tab = kernels.sinh_ratio_derivs(alpha, L - x, L, dmax)
        tab[1::2] *= -1.0
        return tab
    return kernels.sinh_ratio_derivs(alpha, x, L, dmax)


def _trig_table(b, x, dmax, phase=0.0, reflect_L=None):
    """Derivatives of sin(b u + phase) with u = x, or u = L - x."""
    u = x if reflect_L is None else reflect_L - x
    sgn = 1.0 if reflect_L is None else -1.0
    out = np.empty((dmax + 1,) + np.shape(x))
    for d in range(dmax + 1):
        out[d] = (sgn * b) ** d * np.sin(b * u + phase + d * math.pi / 2.0)
    return out


def _leibniz(A, B):
    dmax = A.shape[0] - 1
    out = np.zeros_like(A)
    for d in range(dmax + 1):
        for j in range(d + 1):
            out[d] += comb(d, j, exact=True) * A[j] * B[d - j]
    return out


def _linear_table(x, dmax, c0, c1):
    out = np.zeros((dmax + 1,) + np.shape(x))
    out[0] = c0 + c1 * x
    if dmax >= 1:
        out[1] = c1
    return out


def complex_degenerate(roots: WRootSet, L: float) -> bool:
    return (roots.regime is Regime.COMPLEX_PAIR
            and abs(math.sin(roots.roots[1] * L)) < COMPLEX_DEGENERACY)


def w_profile_table(roots: WRootSet, l: int, x, L: float, dmax: int = DMAX,
                    alternative: bool | None = None) -> np.ndarray:
    """Derivatives 0..dmax of the l-th homogeneous w-profile on [0, L].

    In the oscillatory regime the alternative span is used automatically
    when the endpoint-normalized profiles are nearly dependent.
    """
    x = np.asarray(x, dtype=float)
    if l not in (1, 2, 3, 4):
        raise ValueError(f"profile index must be 1..4, got {l}")
    reg = roots.regime
    if reg is Regime.REAL_DISTINCT:
        alpha = roots.roots[0] if l in (1, 2) else roots.roots[1]
        return _sinh_table(alpha, x, L, dmax, reflect=l in (2, 4))
    if reg is Regime.REAL_DOUBLE:
        a3 = roots.roots[0]
        if l == 1:
            return _sinh_table(a3, x, L, dmax)
        if l == 3:
            return _sinh_table(a3, x, L, dmax, reflect=True)
        if l == 2:
            return _leibniz(_linear_table(x, dmax, 0.0, 1.0 / L), _sinh_table(a3, x, L, dmax))
        return _leibniz(_linear_table(x, dmax, 1.0, -1.0 / L),
                        _sinh_table(a3, x, L, dmax, reflect=True))
    a5, a6 = roots.roots
    if alternative is None:
        alternative = complex_degenerate(roots, L)
    S = _sinh_table(a5, x, L, dmax, reflect=l in (3, 4))
    if alternative:
        phase = 0.0 if l in (1, 3) else math.pi / 2.0
        T = _trig_table(a6, x, dmax, phase, reflect_L=L if l in (3, 4) else None)
        return _leibniz(S, T)
    T = _trig_table(a6, x, dmax, 0.0, reflect_L=L if l in (2, 4) else None)
    return _leibniz(S, T) / math.sin(a6 * L)


def eval_w_boundary_1d(roots: WRootSet, l: int, x, L: float, d: int = 0):
    if d > DMAX:
        raise ValueError(f"derivative order {d} exceeds {DMAX}")
    return w_profile_table(roots, l, np.atleast_1d(x), L, d)[d].reshape(np.shape(x))


def psi_profile_table(alpha7: float, l: int, x, L: float, dmax: int = DMAX) -> np.ndarray:
    if l not in (1, 2):
        raise ValueError(f"psi profile index must be 1 or 2, got {l}")
    return _sinh_table(alpha7, np.asarray(x, dtype=float), L, dmax, reflect=l == 2)


def eval_psi_boundary_1d(root: PsiRoot | float, l: int, x, L: float, d: int = 0):
    if d > 2:
        raise ValueError("psi profiles are differentiated at most twice")
    alpha7 = root.alpha7 if isinstance(root, PsiRoot) else float(root)
    return psi_profile_table(alpha7, l, np.atleast_1d(x), L, d)[d].reshape(np.shape(x))


@dataclass(frozen=True)
class Factor:
    """One-dimensional factor of a separable basis function."""

    kind: str  # poly | sin | cos | wprof | psiprof
    index: int
    l: int = 0
    L: float = 1.0
    roots: object = field(default=None, compare=False)

    @property
    def key(self):
        return (self.kind, self.index, self.l, self.L)

    def table(self, x, dmax=DMAX) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "poly":
            return np.stack([corner_poly(self.index, x, self.L, d) for d in range(dmax + 1)])
        if self.kind == "sin":
            return _trig_table(self.index * math.pi / self.L, x, dmax)
        if self.kind == "cos":
            return _trig_table(self.index * math.pi / self.L, x, dmax, math.pi / 2.0)
        if self.kind == "wprof":
            return w_profile_table(self.roots, self.l, x, self.L, dmax)
        if self.kind == "psiprof":
            return psi_profile_table(self.roots.alpha7, self.l, x, self.L, dmax)
        raise ValueError(self.kind)

    @property
    def alpha(self) -> float:
        if self.kind in ("sin", "cos"):
            return self.index * math.pi / self.L
        if self.kind == "wprof":
            return self.roots.alpha_max
        if self.kind == "psiprof":
            return self.roots.alpha7
        return 0.0


@dataclass(frozen=True)
class BasisId:
    family: str
    indices: tuple

    @property
    def is_psi(self) -> bool:
        return self.family in PSI_FAMILIES


@dataclass
class BasisCatalog:
    a: float
    b: float
    M: int
    N: int
    consts: DerivedConstants
    ids: list
    xfactors: list
    yfactors: list
    roots_x1: dict  # n -> WRootSet, profiles along x1 (length a)
    roots_x2: dict  # m -> WRootSet, profiles along x2 (length b)
    psi_x1: dict
    psi_x2: dict
    diagnostics: list = field(default_factory=list)

    @property
    def n03(self) -> int:
        return 16 + self.M * self.N

    @property
    def n12(self) -> int:
        return 6 * self.N + 6 * self.M + 4

    @property
    def size(self) -> int:
        return len(self.ids)

    @property
    def is_psi(self) -> np.ndarray:
        return np.array([bid.is_psi for bid in self.ids])

    @property
    def alpha_max(self) -> float:
        return max(max(f.alpha for f in self.xfactors), max(f.alpha for f in self.yfactors))

    def index_of(self, bid: BasisId) -> int:
        return self.ids.index(bid)

    def family_slice(self, family: str) -> slice:
        idx = [i for i, bid in enumerate(self.ids) if bid.family == family]
        return slice(idx[0], idx[-1] + 1)

    def tables(self, x1, x2, dmax: int = DMAX):
        """Derivative tables ``X[d, node, col]`` and ``Y[d, node, col]``."""
        return (_factor_tables(self.xfactors, np.asarray(x1, dtype=float), dmax),
                _factor_tables(self.yfactors, np.asarray(x2, dtype=float), dmax))


def _factor_tables(factors, x, dmax):
    out = np.empty((dmax + 1, x.size, len(factors)))
    cache = {}
    for j, f in enumerate(factors):
        tab = cache.get(f.key)
        if tab is None:
            tab = f.table(x.ravel(), dmax)
            cache[f.key] = tab
        out[:, :, j] = tab
    return out


def build_catalog(spec: ModelSpec, consts: DerivedConstants) -> BasisCatalog:
    a, b, M, N = spec.geometry.a, spec.geometry.b, spec.M, spec.N
    h = spec.geometry.h
    ids, xf, yf = [], [], []

    def add(family, indices, fx, fy):
        ids.append(BasisId(family, indices))
        xf.append(fx)
        yf.append(fy)

    for i in range(1, 5):
        for j in range(1, 5):
            add("CornerW", (i, j), Factor("poly", i, L=a), Factor("poly", j, L=b))
    for m in range(1, M + 1):
        for n in range(1, N + 1):
            add("InternalW", (m, n), Factor("sin", m, L=a), Factor("sin", n, L=b))

    roots_x1 = {n: w_roots(n, consts, b) for n in range(1, N + 1)}
    roots_x2 = {m: w_roots(m, consts, a) for m in range(1, M + 1)}
    psi_x1 = {n: psi_root(n, h, b) for n in range(0, N + 1)}
    psi_x2 = {m: psi_root(m, h, a) for m in range(0, M + 1)}
    diagnostics = []
    for n, rs in roots_x1.items():
        for l in range(1, 5):
            add("BoundaryW_x1", (n, l), Factor("wprof", n, l, a, rs), Factor("sin", n, L=b))
        if complex_degenerate(rs, a):
            diagnostics.append(f"BoundaryW_x1 n={n}: |sin(alpha6 a)| < {COMPLEX_DEGENERACY}, "
                               "alternative oscillatory span used")
    for m, rs in roots_x2.items():
        for l in range(1, 5):
            add("BoundaryW_x2", (m, l), Factor("sin", m, L=a), Factor("wprof", m, l, b, rs))
        if complex_degenerate(rs, b):
            diagnostics.append(f"BoundaryW_x2 m={m}: |sin(alpha6 b)| < {COMPLEX_DEGENERACY}, "
                               "alternative oscillatory span used")
    for n, pr in psi_x1.items():
        for l in (1, 2):
            add("BoundaryPsi_x1", (n, l), Factor("psiprof", n, l, a, pr), Factor("cos", n, L=b))
    for m, pr in psi_x2.items():
        for l in (1, 2):
            add("BoundaryPsi_x2", (m, l), Factor("cos", m, L=a), Factor("psiprof", m, l, b, pr))

    return BasisCatalog(a, b, M, N, consts, ids, xf, yf, roots_x1, roots_x2,
                        psi_x1, psi_x2, diagnostics)


def eval_basis(bid: BasisId, catalog: BasisCatalog, point, deriv=(0, 0)) -> float:
    d1, d2 = deriv
    cap = 2 if bid.is_psi else DMAX
    if d1 < 0 or d2 < 0 or d1 + d2 > cap:
        raise ValueError(f"derivative {deriv} exceeds the cap {cap} of {bid.family}")
    j = catalog.index_of(bid)
    x1, x2 = point
    fx = catalog.xfactors[j].table(np.array([x1], dtype=float), d1)[d1, 0]
    fy = catalog.yfactors[j].table(np.array([x2], dtype=float), d2)[d2, 0]
    return float(fx * fy)
