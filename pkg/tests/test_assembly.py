from dataclasses import replace

import numpy as np
import pytest

from reissner_fsm.assembly import (apply_essential_bc, assemble_K, assemble_Q, assemble_raw,
                                   energy_pairs, essential_values)
from reissner_fsm.model import EDGE_NAMES, EdgeCondition, uniform_load
from reissner_fsm.quadrature import build_quadrature
from reissner_fsm.reduction import field_rows, partition_and_reduce, field_terms, combine_terms
from reissner_fsm.validation import SCHEMES, base_spec, reference_problem

from conftest import reduced_for


def _with_edges(spec, kinds):
    return replace(spec, edges={e: EdgeCondition(k) for e, k in zip(EDGE_NAMES, kinds)})


def test_stiffness_symmetric_and_semidefinite(scheme1a_small):
    spec, ref, c, red = scheme1a_small
    K = assemble_K(red, c, symmetrize=False)
    assert np.linalg.norm(K - K.T) <= 1e-12 * np.linalg.norm(K)
    lam = np.linalg.eigvalsh(0.5 * (K + K.T))
    assert lam.min() >= -1e-8 * np.abs(lam).max()


def test_foundation_shear_is_gradient_of_w():
    c = reduced_for(base_spec(SCHEMES["1b"], 1))[0]
    pairs = energy_pairs(c)["foundation"]
    assert pairs[1][1] == {(1, 0): (1.0, 0.0)}
    assert pairs[2][1] == {(0, 1): (1.0, 0.0)}


def test_separable_assembly_matches_direct_quadrature():
    spec = base_spec(SCHEMES["1b"], 2)
    c, red = reduced_for(spec)
    raw = assemble_raw(red, c)
    rule = red.rule
    X1, X2 = np.meshgrid(rule.x1.x, rule.x2.x, indexing="ij")
    W = np.outer(rule.x1.w, rule.x2.w).ravel()
    for part, pairs in energy_pairs(c).items():
        K = np.zeros_like(raw[part])
        for coef, tf, tg in pairs:
            F = field_rows(red.catalog, "", X1, X2, tf)
            G = field_rows(red.catalog, "", X1, X2, tg)
            K += coef * (F * W[:, None]).T @ G
        K = 0.5 * (K + K.T)
        assert np.allclose(raw[part], K, rtol=1e-10, atol=1e-10 * np.abs(K).max())


def test_clamped_uniform_load_has_no_edge_work():
    spec = replace(base_spec(SCHEMES["1a"], 3), load=uniform_load(2.0))
    c, red = reduced_for(spec)
    Q = assemble_Q(red, c, spec, parts=True)
    assert np.all(Q["edges"] == 0.0)
    # domain load equals q0 times the integral of each modified w column
    rule = red.rule
    X1, X2 = np.meshgrid(rule.x1.x, rule.x2.x, indexing="ij")
    W = np.outer(rule.x1.w, rule.x2.w).ravel()
    rows = red.compose(field_rows(red.catalog, "w", X1, X2))
    assert np.allclose(Q["domain"], 2.0 * W @ rows, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("kinds,count", [("CCCC", "all"), ("SSSS", "w"), ("FFFF", 0),
                                         ("CSFS", None)])
def test_constraint_counts(kinds, count):
    M, N = 3, 2
    spec = _with_edges(base_spec(SCHEMES["1a"], M, N), kinds)
    c, red = reduced_for(spec)
    fixed, vals = essential_values(spec, red)
    if count == "all":
        assert fixed.size == 6 * N + 6 * M + 4
    elif count == "w":
        assert fixed.size == 2 * N + 2 * M
    elif count == 0:
        assert fixed.size == 0
    else:
        # C edge x1a: 3N+1, S edges x10 and x20 w blocks: N + M, F edge: none
        assert fixed.size == (3 * N + 1) + N + M
    assert np.all(vals == 0.0)
    system = apply_essential_bc(assemble_K(red, c), np.zeros(red.size), spec, red)
    assert system.size + fixed.size == red.size


def test_refinement_invariance():
    spec, _ = reference_problem(SCHEMES["1a"], 3)
    c, red = reduced_for(spec)
    rule2 = build_quadrature(spec.geometry, red.catalog, refine=2)
    red2 = partition_and_reduce(red.R, red.catalog, rule2)
    K1, K2 = assemble_K(red, c), assemble_K(red2, c)
    Q1, Q2 = assemble_Q(red, c, spec), assemble_Q(red2, c, spec)
    assert np.abs(K1 - K2).max() <= 1e-8 * np.abs(K1).max()
    assert np.abs(Q1 - Q2).max() <= 1e-8 * np.abs(Q1).max()


def test_free_edge_moment_work_sign():
    # unit Mn on x1 = a couples to the normal rotation with a plus sign,
    # on x1 = 0 with a minus sign
    base = _with_edges(base_spec(SCHEMES["1a"], 2), "FFFF")
    c, red = reduced_for(base)
    rule = red.rule
    for edge, sign in (("x1a", 1.0), ("x10", -1.0)):
        edges = dict(base.edges)
        edges[edge] = EdgeCondition("F", {"Mn": lambda s: np.ones_like(s)})
        spec = replace(base, edges=edges)
        Q = assemble_Q(red, c, spec, parts=True)["edges"]
        x = red.catalog.a if edge == "x1a" else 0.0
        pts = np.full_like(rule.x2.x, x)
        rows = red.compose(field_rows(red.catalog, "bx1", pts, rule.x2.x))
        assert np.allclose(Q, sign * rule.x2.w @ rows, atol=1e-12)


def test_numpy_fallback_matches_jit(scheme1a_small, monkeypatch):
    from reissner_fsm import kernels
    spec, ref, c, red = scheme1a_small
    monkeypatch.setattr(kernels, "USE_JIT", True)
    K_jit = assemble_K(red, c)
    monkeypatch.setattr(kernels, "USE_JIT", False)
    K_np = assemble_K(red, c)
    assert np.allclose(K_jit, K_np, rtol=1e-13, atol=1e-13 * np.abs(K_np).max())
