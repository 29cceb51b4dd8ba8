"""Stiffness matrix, equivalent load vector and essential constraints.

All basis functions are separable and the quadrature is a tensor rule, so
each 2D integral of a product of two basis derivatives factors into two 1D
Gram integrals. The stiffness matrix is a weighted sum of Hadamard
products of 1D Gram matrices (see :func:`kernels.hadamard_combine`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .basis import DMAX
from .model import EDGE_NAMES, DerivedConstants, ModelSpec
from .reduction import (ReducedBasis, combine_terms, edge_layout, edge_points,
                        edge_trace_coeffs, field_terms, rows_from_tables, _edge_rule)

log = logging.getLogger(__name__)


class AssemblyError(RuntimeError):
    pass


def compliance(c: DerivedConstants) -> dict:
    """Plate compliance constants d_11 .. d_55."""
    d11 = 1.0 / (c.D * (1.0 - c.mu**2))
    return {"d11": d11, "d22": d11, "d12": -c.mu * d11,
            "d33": 2.0 / (c.D * (1.0 - c.mu)), "d44": 1.0 / c.C_s, "d55": 1.0 / c.C_s}


def energy_pairs(c: DerivedConstants) -> dict:
    """Quadratic energy density as ``{part: [(coef, row_f, row_g), ...]}``."""
    t = {name: field_terms(name, c) for name in
         ("w", "bx1", "bx2", "Mx1", "Mx2", "Mx1x2", "Qx1", "Qx2")}
    d = compliance(c)
    # foundation shear acts on grad w = Q / C_s - beta
    g1 = combine_terms((1.0 / c.C_s, t["Qx1"]), (-1.0, t["bx1"]))
    g2 = combine_terms((1.0 / c.C_s, t["Qx2"]), (-1.0, t["bx2"]))
    plate = [(d["d11"], t["Mx1"], t["Mx1"]), (d["d12"], t["Mx1"], t["Mx2"]),
             (d["d12"], t["Mx2"], t["Mx1"]), (d["d22"], t["Mx2"], t["Mx2"]),
             (d["d33"], t["Mx1x2"], t["Mx1x2"]),
             (d["d44"], t["Qx1"], t["Qx1"]), (d["d55"], t["Qx2"], t["Qx2"])]
    found = [(c.k, t["w"], t["w"]), (c.G_p, g1, g1), (c.G_p, g2, g2)]
    return {"plate": plate, "foundation": [p for p in found if p[0] != 0.0]}


def _combos(pairs):
    acc: dict = {}
    for coef, tf, tg in pairs:
        for (p, r), (fw, fp) in tf.items():
            for (pp, rr), (gw, gp) in tg.items():
                m = coef * np.array([[fw * gw, fw * gp], [fp * gw, fp * gp]])
                key = (p, pp, r, rr)
                acc[key] = acc.get(key, 0.0) + m
    keys = [k for k in acc if np.any(acc[k] != 0.0)]
    if not keys:
        return None
    arr = np.array(keys, dtype=np.int64).reshape(-1, 4)
    coef = np.stack([acc[k] for k in keys])
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], coef


def gram_tables(reduced: ReducedBasis):
    """1D Gram integrals ``I[p, r] = int X^(p) X^(r)`` in both directions."""
    cat, rule = reduced.catalog, reduced.rule
    X, Y = cat.tables(rule.x1.x, rule.x2.x)
    Ix = _gram(X, rule.x1.w)
    Iy = _gram(Y, rule.x2.w)
    return X, Y, Ix, Iy


def _gram(T, w):
    n = T.shape[2]
    out = np.empty((DMAX + 1, DMAX + 1, n, n))
    for p in range(DMAX + 1):
        Tw = T[p] * w[:, None]
        for r in range(p, DMAX + 1):
            out[p, r] = Tw.T @ T[r]
            if r != p:
                out[r, p] = out[p, r].T
    return out


def assemble_raw(reduced: ReducedBasis, consts: DerivedConstants, grams=None,
                 symmetrize: bool = True) -> dict:
    """Energy matrices over raw coefficients, one per energy part."""
    if grams is None:
        grams = gram_tables(reduced)
    _, _, Ix, Iy = grams
    types = reduced.catalog.is_psi.astype(np.int64)
    parts = {}
    for name, pairs in energy_pairs(consts).items():
        combos = _combos(pairs)
        if combos is None:
            parts[name] = np.zeros((types.size, types.size))
            continue
        pa, pb, ra, rb, coef = combos
        K = kernels.hadamard_combine(Ix, Iy, pa, pb, ra, rb, coef, types)
        parts[name] = 0.5 * (K + K.T) if symmetrize else K
    return parts


def _to_reduced(reduced: ReducedBasis, K: np.ndarray, symmetrize: bool = True) -> np.ndarray:
    T = reduced.T
    KR = T.T @ K @ T
    return 0.5 * (KR + KR.T) if symmetrize else KR


def assemble_K(reduced: ReducedBasis, consts: DerivedConstants, grams=None,
               parts: bool = False, symmetrize: bool = True):
    """Stiffness matrix over ``q_R``; with ``parts=True`` a dict of the
    plate and foundation contributions is returned instead.

    ``symmetrize=False`` skips the final ``(K + K^T) / 2`` so the symmetry
    of the quadrature itself can be inspected.
    """
    raw = assemble_raw(reduced, consts, grams, symmetrize)
    red = {k: _to_reduced(reduced, v, symmetrize) for k, v in raw.items()}
    for name, K in red.items():
        bad = ~np.isfinite(K)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            ids = reduced.catalog.ids
            raise AssemblyError(f"non-finite stiffness entry in {name} part at "
                                f"({i}, {j}); raw columns include {ids[min(i, len(ids) - 1)]}")
    if parts:
        return red
    return red["plate"] + red["foundation"]


def _natural_quantities(kind: str) -> tuple:
    return {"C": (), "S": ("Mn", "Mnt"), "F": ("Qn", "Mn", "Mnt")}[kind]


def assemble_Q(reduced: ReducedBasis, consts: DerivedConstants, spec: ModelSpec,
               grams=None, parts: bool = False):
    """Equivalent load vector over ``q_R``.

    Edge work is included only for the natural data of each edge kind
    (S: Mn, Mnt; F: Qn, Mn, Mnt). Edges x1 = a and x2 = b enter with a
    plus sign, x1 = 0 and x2 = 0 with a minus sign.
    """
    cat, rule = reduced.catalog, reduced.rule
    if grams is None:
        X, Y = cat.tables(rule.x1.x, rule.x2.x)
    else:
        X, Y = grams[0], grams[1]
    is_w = ~cat.is_psi
    g1, g2 = np.meshgrid(rule.x1.x, rule.x2.x, indexing="ij")
    qv = np.asarray(spec.load(g1, g2), dtype=float)
    Wq = rule.x1.w[:, None] * np.broadcast_to(qv, g1.shape) * rule.x2.w[None, :]
    dom = np.sum((X[0].T @ Wq) * Y[0].T, axis=1) * is_w

    edge = np.zeros(cat.size)
    for name in EDGE_NAMES:
        ec = spec.edges[name]
        quantities = _natural_quantities(ec.kind)
        if not quantities:
            continue
        r1 = _edge_rule(rule, name)
        x1, x2 = edge_points(name, r1.x, cat.a, cat.b)
        Xe, Ye = cat.tables(x1, x2)
        normal, tangential = ("bx1", "bx2") if name.startswith("x1") else ("bx2", "bx1")
        target = {"Qn": "w", "Mn": normal, "Mnt": tangential}
        sign = 1.0 if name in ("x1a", "x2b") else -1.0
        for qname in quantities:
            vals = np.asarray(ec.trace(qname)(r1.x), dtype=float)
            if not np.any(vals):
                continue
            rows = rows_from_tables(field_terms(target[qname], consts), cat.is_psi, Xe, Ye)
            edge += sign * ((r1.w * vals) @ rows)
    T = reduced.T
    out = {"domain": T.T @ dom, "edges": T.T @ edge}
    if parts:
        return out
    return out["domain"] + out["edges"]


@dataclass
class DiscreteSystem:
    K: np.ndarray  # full stiffness over q_R
    Q: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    notices: list = field(default_factory=list)

    @property
    def K_free(self) -> np.ndarray:
        return self.K[np.ix_(self.free, self.free)]

    @property
    def Q_free(self) -> np.ndarray:
        K_fc = self.K[np.ix_(self.free, self.fixed)]
        return self.Q[self.free] - K_fc @ self.fixed_values

    @property
    def size(self) -> int:
        return self.free.size


def essential_values(spec: ModelSpec, reduced: ReducedBasis):
    """Indices into ``q_R`` and values of the constrained boundary
    coefficients (C edges: all three blocks; S edges: the w block)."""
    layout = edge_layout(reduced.catalog.M, reduced.catalog.N)
    idx, vals = [], []
    for blk in layout:
        ec = spec.edges[blk.edge]
        if ec.kind == "F" or (ec.kind == "S" and blk.quantity != "w"):
            continue
        r1 = _edge_rule(reduced.rule, blk.edge)
        coeffs = edge_trace_coeffs(ec.trace(blk.quantity), blk.series, blk.count, r1)
        idx.append(reduced.n03 + blk.offset + np.arange(blk.count))
        vals.append(np.atleast_1d(coeffs))
    if not idx:
        return np.zeros(0, dtype=int), np.zeros(0)
    return np.concatenate(idx), np.concatenate(vals)


def apply_essential_bc(K: np.ndarray, Q: np.ndarray, spec: ModelSpec,
                       reduced: ReducedBasis) -> DiscreteSystem:
    fixed, values = essential_values(spec, reduced)
    free = np.setdiff1d(np.arange(K.shape[0]), fixed)
    notices = []
    if free.size == 0:
        notices.append("every coefficient is constrained; the system is trivial")
    return DiscreteSystem(K, Q, free, fixed, values, notices)
