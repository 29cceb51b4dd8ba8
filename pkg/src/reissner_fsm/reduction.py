"""Boundary Fourier coefficients, coefficient reduction and field rows.

A field row maps the raw coefficients ``q = [q_03; q_12]`` to a physical
quantity at a point. The reduction eliminates ``q_12`` in favour of the
boundary Fourier coefficients ``q_b`` so rows act on ``q_R = [q_03; q_b]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .basis import BasisCatalog
from .model import EDGE_NAMES, DerivedConstants
from .quadrature import QuadratureRule, Rule1D

FIELDS = ("w", "bx1", "bx2", "Mx1", "Mx2", "Mx1x2", "Qx1", "Qx2", "qe")
RCOND_MIN = 1e-14


class SingularReductionError(np.linalg.LinAlgError):
    pass


def field_terms(name: str, c: DerivedConstants) -> dict:
    """Derivative combination of a field as ``{(d1, d2): (coef_w, coef_psi)}``.

    w-columns use the first coefficient, psi-columns the second.
    """
    D, Cs, mu = c.D, c.C_s, c.mu
    r = D / Cs
    if name == "w":
        t = {(0, 0): (1.0, 0.0)}
    elif name == "psi":
        t = {(0, 0): (0.0, 1.0)}
    elif name == "w1":
        t = {(1, 0): (1.0, 0.0)}
    elif name == "w2":
        t = {(0, 1): (1.0, 0.0)}
    elif name == "bx1":
        t = {(3, 0): (-r, 0.0), (1, 2): (-r, 0.0), (1, 0): (-1.0, 0.0),
             (0, 1): (0.0, 1.0 / Cs)}
    elif name == "bx2":
        t = {(2, 1): (-r, 0.0), (0, 3): (-r, 0.0), (0, 1): (-1.0, 0.0),
             (1, 0): (0.0, -1.0 / Cs)}
    elif name == "Mx1":
        t = {(4, 0): (-D * r, 0.0), (2, 2): (-D * r * (1 + mu), 0.0),
             (2, 0): (-D, 0.0), (0, 4): (-mu * D * r, 0.0), (0, 2): (-mu * D, 0.0),
             (1, 1): (0.0, D * (1 - mu) / Cs)}
    elif name == "Mx2":
        t = {(4, 0): (-mu * D * r, 0.0), (2, 2): (-D * r * (1 + mu), 0.0),
             (2, 0): (-mu * D, 0.0), (0, 4): (-D * r, 0.0), (0, 2): (-D, 0.0),
             (1, 1): (0.0, -D * (1 - mu) / Cs)}
    elif name == "Mx1x2":
        t = {(3, 1): (-D * r * (1 - mu), 0.0), (1, 3): (-D * r * (1 - mu), 0.0),
             (1, 1): (-D * (1 - mu), 0.0),
             (2, 0): (0.0, -D * (1 - mu) / (2 * Cs)), (0, 2): (0.0, D * (1 - mu) / (2 * Cs))}
    elif name == "Qx1":
        t = {(3, 0): (-D, 0.0), (1, 2): (-D, 0.0), (0, 1): (0.0, 1.0)}
    elif name == "Qx2":
        t = {(2, 1): (-D, 0.0), (0, 3): (-D, 0.0), (1, 0): (0.0, -1.0)}
    elif name == "qe":
        t = {(0, 0): (c.k, 0.0), (2, 0): (-c.G_p, 0.0), (0, 2): (-c.G_p, 0.0)}
    else:
        raise KeyError(f"unknown field {name!r}")
    return t


def combine_terms(*pairs) -> dict:
    """Linear combination ``sum coef * terms`` of term dictionaries."""
    out: dict = {}
    for coef, terms in pairs:
        for key, (cw, cp) in terms.items():
            ow, op = out.get(key, (0.0, 0.0))
            out[key] = (ow + coef * cw, op + coef * cp)
    return {k: v for k, v in out.items() if v != (0.0, 0.0)}


def column_coefficients(terms: dict, is_psi: np.ndarray) -> dict:
    return {key: np.where(is_psi, cp, cw) for key, (cw, cp) in terms.items()}


def rows_from_tables(terms: dict, is_psi, X, Y) -> np.ndarray:
    """Pointwise rows: X and Y are tables sampled at the same points."""
    out = np.zeros(X.shape[1:])
    for (p, r), coef in column_coefficients(terms, is_psi).items():
        out += coef * X[p] * Y[r]
    return out


def field_rows(catalog: BasisCatalog, name: str, x1, x2, terms: dict | None = None):
    """Raw rows of field ``name`` at the points ``(x1[i], x2[i])``."""
    x1, x2 = np.broadcast_arrays(np.atleast_1d(np.asarray(x1, float)),
                                 np.atleast_1d(np.asarray(x2, float)))
    X, Y = catalog.tables(x1.ravel(), x2.ravel())
    if terms is None:
        terms = field_terms(name, catalog.consts)
    return rows_from_tables(terms, catalog.is_psi, X, Y)


@dataclass(frozen=True)
class EdgeBlock:
    edge: str
    quantity: str  # w | bx1 | bx2
    series: str  # sine | cosine
    count: int
    offset: int


def edge_layout(M: int, N: int) -> list[EdgeBlock]:
    """Order of the boundary Fourier coefficients ``q_b``."""
    blocks, off = [], 0
    for edge in EDGE_NAMES:
        if edge.startswith("x1"):
            spec = (("w", "sine", N), ("bx1", "sine", N), ("bx2", "cosine", N + 1))
        else:
            spec = (("w", "sine", M), ("bx2", "sine", M), ("bx1", "cosine", M + 1))
        for quantity, series, count in spec:
            blocks.append(EdgeBlock(edge, quantity, series, count, off))
            off += count
    return blocks


def edge_points(edge: str, s, a: float, b: float):
    """Coordinates of edge ``edge`` at tangential coordinates ``s``."""
    s = np.asarray(s, dtype=float)
    if edge == "x1a":
        return np.full_like(s, a), s
    if edge == "x10":
        return np.zeros_like(s), s
    if edge == "x2b":
        return s, np.full_like(s, b)
    if edge == "x20":
        return s, np.zeros_like(s)
    raise KeyError(edge)


def edge_trace_coeffs(f, series: str, terms: int, rule: Rule1D) -> np.ndarray:
    """Half-range Fourier coefficients of ``f`` on ``[0, L]``.

    ``f`` is a callable of the edge coordinate or its samples at the rule
    nodes (a trailing axis of samples is allowed). Sine coefficients are
    for n = 1..terms, cosine coefficients for n = 0..terms-1.
    """
    L = rule.length
    vals = f(rule.x) if callable(f) else f
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if series == "sine":
        n = np.arange(1, terms + 1)
        basis = np.sin(np.outer(rule.x, n) * np.pi / L) * (2.0 / L)
    elif series == "cosine":
        n = np.arange(0, terms)
        basis = np.cos(np.outer(rule.x, n) * np.pi / L) * (2.0 / L)
        basis[:, 0] = 1.0 / L
    else:
        raise ValueError(series)
    out = (basis * rule.w[:, None]).T @ vals
    return out[:, 0] if out.shape[1] == 1 else out


def _edge_rule(rule: QuadratureRule, edge: str) -> Rule1D:
    return rule.x2 if edge.startswith("x1") else rule.x1


def build_Rpf(catalog: BasisCatalog, rule: QuadratureRule) -> np.ndarray:
    """Boundary-coefficient matrix: ``q_b = R_pf q`` for raw ``q``."""
    layout = edge_layout(catalog.M, catalog.N)
    R = np.zeros((catalog.n12, catalog.size))
    for edge in EDGE_NAMES:
        r1 = _edge_rule(rule, edge)
        x1, x2 = edge_points(edge, r1.x, catalog.a, catalog.b)
        X, Y = catalog.tables(x1, x2)
        rows = {q: rows_from_tables(field_terms(q, catalog.consts), catalog.is_psi, X, Y)
                for q in ("w", "bx1", "bx2")}
        for blk in layout:
            if blk.edge != edge:
                continue
            R[blk.offset:blk.offset + blk.count] = edge_trace_coeffs(
                rows[blk.quantity], blk.series, blk.count, r1)
    return R


def _equilibrate(A):
    r = 1.0 / np.max(np.abs(A), axis=1)
    As = A * r[:, None]
    c = 1.0 / np.max(np.abs(As), axis=0)
    return r, c, As * c[None, :]


def lu_rcond(lu_piv, anorm):
    lu, _ = lu_piv
    rcond, info = sla.lapack.dgecon(lu, anorm, norm="1")
    return float(rcond)


@dataclass
class ReducedBasis:
    catalog: BasisCatalog
    rule: QuadratureRule
    R: np.ndarray
    A: np.ndarray
    B: np.ndarray
    rcond: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def n03(self) -> int:
        return self.catalog.n03

    @property
    def nb(self) -> int:
        return self.catalog.n12

    @property
    def size(self) -> int:
        return self.n03 + self.nb

    @property
    def T(self) -> np.ndarray:
        """Map ``q = T q_R`` from reduced to raw coefficients."""
        n03, nb = self.n03, self.nb
        top = np.hstack((np.eye(n03), np.zeros((n03, nb))))
        return np.vstack((top, np.hstack((self.A, self.B))))

    def raw_coefficients(self, qR: np.ndarray) -> np.ndarray:
        q03, qb = qR[:self.n03], qR[self.n03:]
        return np.concatenate((q03, self.A @ q03 + self.B @ qb), axis=0)

    def compose(self, rows: np.ndarray) -> np.ndarray:
        """Turn raw rows (..., |q|) into reduced rows (..., |q_R|)."""
        r03, r12 = rows[..., :self.n03], rows[..., self.n03:]
        return np.concatenate((r03 + r12 @ self.A, r12 @ self.B), axis=-1)


def partition_and_reduce(R: np.ndarray, catalog: BasisCatalog,
                         rule: QuadratureRule) -> ReducedBasis:
    n03 = catalog.n03
    R03, R12 = R[:, :n03], R[:, n03:]
    if R12.shape[0] != R12.shape[1]:
        raise SingularReductionError(f"R_pf,12 is {R12.shape}, not square")
    r, c, Rs = _equilibrate(R12)
    with warnings.catch_warnings():
        # singularity is reported through rcond below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu = sla.lu_factor(Rs, check_finite=True)
    rcond = lu_rcond(lu, np.linalg.norm(Rs, 1))
    if rcond < RCOND_MIN:
        raise SingularReductionError(
            f"R_pf,12 is numerically singular (rcond {rcond:.2e}) for M={catalog.M}, "
            f"N={catalog.N}, Delta_h={catalog.consts.Delta_h:.4g}")
    # R12^-1 = diag(c) Rs^-1 diag(r)
    B = c[:, None] * sla.lu_solve(lu, np.diag(r))
    A = -(c[:, None] * sla.lu_solve(lu, r[:, None] * R03))
    res_A = np.linalg.norm(R12 @ A + R03) / max(np.linalg.norm(R03), 1e-300)
    res_B = np.linalg.norm(R12 @ B - np.eye(R12.shape[0])) / np.sqrt(R12.shape[0])
    return ReducedBasis(catalog, rule, R, A, B, rcond,
                        {"residual_A": float(res_A), "residual_B": float(res_B)})


def reduce_catalog(catalog: BasisCatalog, rule: QuadratureRule) -> ReducedBasis:
    return partition_and_reduce(build_Rpf(catalog, rule), catalog, rule)


def eval_gamma_row(which: str, point, reduced: ReducedBasis) -> np.ndarray:
    raw = field_rows(reduced.catalog, which, point[0], point[1])[0]
    return reduced.compose(raw)
