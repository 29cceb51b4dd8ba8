"""Dense solve of the stationary system and field evaluation on grids."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import (DiscreteSystem, apply_essential_bc, assemble_K, assemble_Q,
                       gram_tables)
from .basis import build_catalog
from .model import constants_for, nondimensionalize, validate_spec
from .quadrature import GAUSS_ORDER, build_quadrature
from .reduction import FIELDS, ReducedBasis, column_coefficients, field_terms, reduce_catalog
from .spectra import classify_regime

RCOND_MIN = 1e-14
DEFAULT_GRID = 101


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class SolutionState:
    q_R: np.ndarray
    q: np.ndarray  # raw coefficients [q_03; q_12]
    residual: float  # ||K q - Q|| / ||Q|| on the free block
    backward_error: float  # ||K q - Q|| / (||K|| ||q|| + ||Q||)
    rcond: float
    regime: str
    timing: float
    diagnostics: dict = field(default_factory=dict)


def _residuals(K, q, Q):
    r = K @ q - Q
    nr = np.linalg.norm(r)
    nQ = np.linalg.norm(Q)
    rel = nr / nQ if nQ > 0 else nr
    bwd = nr / (np.linalg.norm(K, 2) * np.linalg.norm(q) + nQ) if nr > 0 else 0.0
    return float(rel), float(bwd)


def solve_dense(K: np.ndarray, Q: np.ndarray, refine_steps: int = 2):
    """Symmetrically equilibrated LU solve with iterative refinement.

    Returns ``(x, rcond)`` where ``rcond`` is the LAPACK 1-norm estimate
    for the equilibrated matrix.
    """
    if not (np.all(np.isfinite(K)) and np.all(np.isfinite(Q))):
        raise SingularSystemError("non-finite entries in the assembled system")
    d = np.abs(np.diag(K))
    d[d == 0.0] = 1.0
    s = 1.0 / np.sqrt(d)
    Ks = K * s[:, None] * s[None, :]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu = sla.lu_factor(Ks)
    rcond = float(sla.lapack.dgecon(lu[0], np.linalg.norm(Ks, 1), norm="1")[0])
    if rcond < RCOND_MIN:
        return None, rcond
    x = s * sla.lu_solve(lu, s * Q)
    for _ in range(refine_steps):
        r = Q - K @ x
        x = x + s * sla.lu_solve(lu, s * r)
    return x, rcond


def solve_system(system: DiscreteSystem, reduced: ReducedBasis, context: str = "") -> SolutionState:
    t0 = time.perf_counter()
    consts = reduced.catalog.consts
    regime = classify_regime(consts).value
    q_R = np.zeros(system.K.shape[0])
    q_R[system.fixed] = system.fixed_values
    if system.size:
        Kf, Qf = system.K_free, system.Q_free
        x, rcond = solve_dense(Kf, Qf)
        if x is None:
            raise SingularSystemError(
                f"stiffness matrix is numerically singular (rcond {rcond:.2e}); regime "
                f"{regime}, M={reduced.catalog.M}, N={reduced.catalog.N}{context}")
        q_R[system.free] = x
        rel, bwd = _residuals(Kf, x, Qf)
    else:
        rcond, rel, bwd = 1.0, 0.0, 0.0
    q = reduced.raw_coefficients(q_R)
    diag = {"reduction_rcond": reduced.rcond, "n_free": int(system.size),
            "n_fixed": int(system.fixed.size), "notices": list(system.notices)}
    diag.update(reduced.diagnostics)
    return SolutionState(q_R, q, rel, bwd, rcond, regime, time.perf_counter() - t0, diag)


@dataclass
class FieldGrids:
    x1: np.ndarray
    x2: np.ndarray
    fields: dict  # name -> (n1, n2) array, indexed [i1, i2]

    def __getitem__(self, name):
        return self.fields[name]

    @property
    def shape(self):
        return (self.x1.size, self.x2.size)

    def same_grid(self, other: "FieldGrids") -> bool:
        return (self.x1.shape == other.x1.shape and self.x2.shape == other.x2.shape
                and np.array_equal(self.x1, other.x1) and np.array_equal(self.x2, other.x2))


def uniform_grid(a: float, b: float, n1: int = DEFAULT_GRID, n2: int | None = None):
    return np.linspace(0.0, a, n1), np.linspace(0.0, b, n2 or n1)


def eval_fields(sol: SolutionState, reduced: ReducedBasis, x1=None, x2=None,
                names=FIELDS) -> FieldGrids:
    """Fields on the tensor grid ``x1 x x2`` (default 101 x 101)."""
    cat = reduced.catalog
    if x1 is None or x2 is None:
        x1, x2 = uniform_grid(cat.a, cat.b)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    X, Y = cat.tables(x1, x2)
    out = {}
    for name in names:
        acc = np.zeros((x1.size, x2.size))
        for (p, r), coef in column_coefficients(field_terms(name, cat.consts), cat.is_psi).items():
            acc += (X[p] * (coef * sol.q)) @ Y[r].T
        out[name] = acc
    return FieldGrids(x1, x2, out)


@dataclass(frozen=True)
class Energy:
    plate: float
    foundation: float
    load: float
    edges: float

    @property
    def total(self) -> float:
        return self.plate + self.foundation + self.load + self.edges


def energy(sol: SolutionState, reduced: ReducedBasis, spec, grams=None) -> Energy:
    """Potential energy split into plate strain, foundation, domain load
    and edge work terms, integrated with the assembly quadrature."""
    consts = reduced.catalog.consts
    K = assemble_K(reduced, consts, grams, parts=True)
    Q = assemble_Q(reduced, consts, spec, grams, parts=True)
    qR = sol.q_R
    return Energy(0.5 * float(qR @ K["plate"] @ qR), 0.5 * float(qR @ K["foundation"] @ qR),
                  -float(qR @ Q["domain"]), -float(qR @ Q["edges"]))


@dataclass
class Solved:
    """Everything produced by one solve, in nondimensional form."""

    spec: object  # scaled ModelSpec
    scale: object
    reduced: ReducedBasis
    system: DiscreteSystem
    state: SolutionState
    grams: tuple | None = None

    @property
    def consts(self):
        return self.reduced.catalog.consts

    def fields(self, n1: int = DEFAULT_GRID, n2: int | None = None, physical: bool = True,
               names=FIELDS) -> FieldGrids:
        cat = self.reduced.catalog
        x1, x2 = uniform_grid(cat.a, cat.b, n1, n2)
        fg = eval_fields(self.state, self.reduced, x1, x2, names)
        if physical:
            s = self.scale
            fg = FieldGrids(x1 * s.length, x2 * s.length,
                            {k: v * s.factor(k) for k, v in fg.fields.items()})
        return fg


def solve_spec(spec, order: int | None = None, refine: int = 1,
               keep_grams: bool = False) -> Solved:
    """Validate, nondimensionalize, build, reduce, assemble and solve."""
    validate_spec(spec)
    scaled, scale = nondimensionalize(spec)
    consts = constants_for(scaled)
    catalog = build_catalog(scaled, consts)
    rule = build_quadrature(scaled.geometry, catalog, order or GAUSS_ORDER, refine=refine)
    reduced = reduce_catalog(catalog, rule)
    grams = gram_tables(reduced)
    K = assemble_K(reduced, consts, grams)
    Q = assemble_Q(reduced, consts, scaled, grams)
    system = apply_essential_bc(K, Q, scaled, reduced)
    state = solve_system(system, reduced, context=f", edges {scaled.bc_string}")
    return Solved(scaled, scale, reduced, system, state, grams if keep_grams else None)
