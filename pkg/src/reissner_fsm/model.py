"""Problem statement for a Reissner plate on a Pasternak foundation.

Everything here is immutable. Physical input is accepted in any consistent
unit system; :func:`nondimensionalize` maps a spec onto the internal
convention ``a = 1, D = 1`` used by every solve.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

EDGE_NAMES = ("x1a", "x10", "x2b", "x20")

# Prescribed quantities per edge kind. Rotations on C edges are named by
# component; moments and shear force are named relative to the edge
# (n = normal, nt = twisting), e.g. on x1 = a: Mn = M_x1, Mnt = M_x1x2.
EDGE_QUANTITIES = {
    "C": ("w", "bx1", "bx2"),
    "S": ("w", "Mn", "Mnt"),
    "F": ("Qn", "Mn", "Mnt"),
}


class SpecError(ValueError):
    """Raised for an invalid or inconsistent problem statement."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Geometry:
    a: float
    b: float
    h: float


@dataclass(frozen=True)
class Material:
    E: float
    mu: float

    @property
    def G(self) -> float:
        return self.E / (2.0 * (1.0 + self.mu))


@dataclass(frozen=True)
class Foundation:
    """Pasternak foundation, given either physically or nondimensionally.

    Exactly one of the pairs ``(k, G_p)`` and ``(k_r, G_pr)`` may be set,
    where ``k_r = k a^4 / D`` and ``G_pr = G_p a^2 / D``.
    """

    k: float | None = None
    G_p: float | None = None
    k_r: float | None = None
    G_pr: float | None = None

    @property
    def is_nondimensional(self) -> bool:
        return self.k_r is not None or self.G_pr is not None

    def resolve(self, D: float, a: float) -> tuple[float, float]:
        """Return the physical ``(k, G_p)``."""
        phys = self.k is not None or self.G_p is not None
        if phys and self.is_nondimensional:
            raise SpecError("foundation: physical (k, G_p) and nondimensional "
                            "(k_r, G_pr) inputs are mutually exclusive")
        if self.is_nondimensional:
            return (self.k_r or 0.0) * D / a**4, (self.G_pr or 0.0) * D / a**2
        return self.k or 0.0, self.G_p or 0.0


def zero_trace(s):
    return np.zeros_like(np.asarray(s, dtype=float))


@dataclass(frozen=True)
class EdgeCondition:
    """Boundary condition on one edge.

    ``data`` maps each prescribed quantity of the kind to a callable of the
    edge coordinate. Missing quantities are homogeneous.
    """

    kind: str
    data: Mapping[str, Callable] = field(default_factory=dict)
    source: str | None = None

    def __post_init__(self):
        if self.kind not in EDGE_QUANTITIES:
            raise SpecError(f"edge kind must be one of C, S, F, got {self.kind!r}")
        allowed = EDGE_QUANTITIES[self.kind]
        extra = sorted(set(self.data) - set(allowed))
        if extra:
            raise SpecError(f"{self.kind} edge does not prescribe {extra}; "
                            f"allowed quantities are {list(allowed)}")
        full = {q: self.data.get(q, zero_trace) for q in allowed}
        object.__setattr__(self, "data", full)

    def trace(self, quantity: str) -> Callable:
        return self.data[quantity]


def uniform_load(q0: float) -> Callable:
    def load(x1, x2):
        return np.full(np.broadcast(np.asarray(x1), np.asarray(x2)).shape, float(q0))
    load.kind = "uniform"
    load.q0 = float(q0)
    return load


@dataclass(frozen=True)
class ModelSpec:
    geometry: Geometry
    material: Material
    foundation: Foundation
    load: Callable
    edges: Mapping[str, EdgeCondition]
    M: int = 10
    N: int = 10

    @property
    def bc_string(self) -> str:
        return "".join(self.edges[e].kind for e in EDGE_NAMES)

    def with_truncation(self, M: int, N: int) -> "ModelSpec":
        return replace(self, M=M, N=N)


@dataclass(frozen=True)
class DerivedConstants:
    D: float
    G: float
    C_s: float
    c_q: float
    k: float
    G_p: float
    D_h: float
    G_ph: float
    Delta_h: float
    mu: float
    h: float


def derive_constants(geometry: Geometry, material: Material,
                     foundation: Foundation) -> DerivedConstants:
    E, mu, h = material.E, material.mu, geometry.h
    D = E * h**3 / (12.0 * (1.0 - mu**2))
    G = material.G
    C_s = 5.0 * G * h / 6.0
    c_q = (2.0 - mu) * h**2 / (10.0 * (1.0 - mu))
    k, G_p = foundation.resolve(D, geometry.a)
    D_h = D + c_q * G_p
    G_ph = G_p + c_q * k
    return DerivedConstants(D=D, G=G, C_s=C_s, c_q=c_q, k=k, G_p=G_p,
                            D_h=D_h, G_ph=G_ph, Delta_h=G_ph**2 - 4.0 * D_h * k,
                            mu=mu, h=h)


def constants_for(spec: ModelSpec) -> DerivedConstants:
    return derive_constants(spec.geometry, spec.material, spec.foundation)


def validate_spec(spec: ModelSpec) -> ModelSpec:
    """Return ``spec`` unchanged or raise :class:`SpecError` listing every
    violated invariant."""
    g, m = spec.geometry, spec.material
    problems = []
    for name in ("a", "b", "h"):
        v = getattr(g, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            problems.append(f"geometry.{name} must be > 0, got {v!r}")
    if not m.E > 0:
        problems.append(f"material.E must be > 0, got {m.E!r}")
    if not 0.0 <= m.mu < 0.5:
        problems.append(f"material.mu must satisfy 0 <= mu < 0.5, got {m.mu!r}")
    f = spec.foundation
    for name in ("k", "G_p", "k_r", "G_pr"):
        v = getattr(f, name)
        if v is not None and v < 0:
            problems.append(f"foundation.{name} must be >= 0, got {v!r}")
    if (f.k is not None or f.G_p is not None) and f.is_nondimensional:
        problems.append("foundation: physical and nondimensional inputs are "
                        "mutually exclusive")
    if spec.M < 1 or spec.N < 1:
        problems.append(f"truncation M, N must be >= 1, got ({spec.M}, {spec.N})")
    missing = [e for e in EDGE_NAMES if e not in spec.edges]
    if missing:
        problems.append(f"missing edge conditions: {missing}")
    if not problems:
        k, G_p = f.resolve(1.0, 1.0)
        if k == 0.0 and G_p == 0.0 and spec.bc_string == "FFFF":
            problems.append("singular: rigid-body mode (FFFF plate without "
                            "foundation support)")
    if problems:
        raise SpecError(problems)
    ratio = g.h / g.a
    if ratio < 1e-3 or ratio > 0.5:
        warnings.warn(f"h/a = {ratio:g} is outside the studied range "
                      "[1e-3, 0.5]", stacklevel=2)
    return spec


@dataclass(frozen=True)
class Scaling:
    """Factors mapping nondimensional results back to physical units."""

    length: float = 1.0
    D: float = 1.0

    @property
    def deflection(self) -> float:
        return self.length

    @property
    def moment(self) -> float:
        return self.D / self.length

    @property
    def shear(self) -> float:
        return self.D / self.length**2

    @property
    def pressure(self) -> float:
        return self.D / self.length**3

    def factor(self, quantity: str) -> float:
        if quantity in ("x1", "x2", "w"):
            return self.length
        if quantity in ("bx1", "bx2"):
            return 1.0
        if quantity in ("Mx1", "Mx2", "Mx1x2", "Mn", "Mnt", "psi"):
            return self.moment
        if quantity in ("Qx1", "Qx2", "Qn"):
            return self.shear
        if quantity in ("qe", "q"):
            return self.pressure
        raise KeyError(quantity)


def _scaled_trace(fn, a, factor):
    def trace(s):
        return np.asarray(fn(np.asarray(s) * a), dtype=float) / factor
    return trace


def nondimensionalize(spec: ModelSpec) -> tuple[ModelSpec, Scaling]:
    """Map ``spec`` onto ``a = 1, D = 1``.

    Returns the scaled spec and the :class:`Scaling` that converts its
    results back. Applying it to an already nondimensional spec is the
    identity up to rounding.
    """
    g, m = spec.geometry, spec.material
    D = derive_constants(g, m, Foundation()).D
    a = g.a
    k, G_p = spec.foundation.resolve(D, a)
    scale = Scaling(length=a, D=D)
    h = g.h / a
    geometry = Geometry(a=1.0, b=g.b / a, h=h)
    material = Material(E=12.0 * (1.0 - m.mu**2) / h**3, mu=m.mu)
    foundation = Foundation(k_r=k * a**4 / D, G_pr=G_p * a**2 / D)

    load_fn = spec.load

    def load(x1, x2):
        return np.asarray(load_fn(np.asarray(x1) * a, np.asarray(x2) * a),
                          dtype=float) / scale.pressure
    if hasattr(load_fn, "kind"):
        load.kind = load_fn.kind
    if hasattr(load_fn, "q0"):
        load.q0 = load_fn.q0 / scale.pressure

    edges = {}
    for name, ec in spec.edges.items():
        data = {q: _scaled_trace(fn, a, scale.factor(q))
                for q, fn in ec.data.items()}
        edges[name] = EdgeCondition(ec.kind, data, ec.source)
    scaled = ModelSpec(geometry, material, foundation, load, edges, spec.M, spec.N)
    return scaled, scale


def regime_preserved(spec: ModelSpec) -> bool:
    """Scale check: the discriminant sign survives nondimensionalization."""
    from .spectra import classify_regime

    scaled, _ = nondimensionalize(spec)
    return classify_regime(constants_for(spec)) == classify_regime(constants_for(scaled))
