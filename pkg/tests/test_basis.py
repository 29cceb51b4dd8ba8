import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reissner_fsm import kernels
from reissner_fsm.basis import (BasisId, build_catalog, complex_degenerate, corner_poly,
                                eval_basis, eval_w_boundary_1d, psi_profile_table,
                                w_profile_table)
from reissner_fsm.model import constants_for
from reissner_fsm.spectra import Regime, w_roots_beta
from reissner_fsm.validation import SCHEMES, Scheme, base_spec


@pytest.mark.parametrize("L", [1.0, 2.5])
def test_corner_polynomials_interpolate(L):
    x = np.array([0.0, L])
    assert np.allclose(corner_poly(1, x, L), [1, 0])
    assert np.allclose(corner_poly(2, x, L), [0, 1])
    for i in (3, 4):
        assert np.allclose(corner_poly(i, x, L), 0.0, atol=1e-14)
    assert np.allclose(corner_poly(3, x, L, 2), [1, 0])
    assert np.allclose(corner_poly(4, x, L, 2), [0, 1])
    # cubic: fourth derivative vanishes
    assert np.all(corner_poly(3, np.linspace(0, L, 5), L, 4) == 0.0)


def test_corner_derivative_chain_rule():
    x = np.linspace(0.1, 1.9, 7)
    h = 1e-5
    for i in (3, 4):
        fd = (corner_poly(i, x + h, 2.0) - corner_poly(i, x - h, 2.0)) / (2 * h)
        assert np.allclose(fd, corner_poly(i, x, 2.0, 1), atol=1e-8)


def _roots(regime):
    from dataclasses import replace
    c = constants_for(base_spec(SCHEMES["1a"]))
    G_ph = {"real": 5.0, "double": 2.0, "complex": 1.0}[regime]
    c = replace(c, D_h=1.0, G_ph=G_ph, k=1.0, Delta_h=G_ph**2 - 4.0)
    return w_roots_beta(1.3, c)


@pytest.mark.parametrize("regime", ["real", "double", "complex"])
def test_profiles_against_direct_hyperbolic_formulas(regime):
    rs = _roots(regime)
    L = 1.0
    x = np.linspace(0.0, L, 9)
    got = np.array([w_profile_table(rs, l, x, L, 0, alternative=False)[0] for l in range(1, 5)])
    if regime == "real":
        a1, a2 = rs.roots
        want = [np.sinh(a1 * x) / np.sinh(a1 * L), np.sinh(a1 * (L - x)) / np.sinh(a1 * L),
                np.sinh(a2 * x) / np.sinh(a2 * L), np.sinh(a2 * (L - x)) / np.sinh(a2 * L)]
    elif regime == "double":
        (a,) = rs.roots
        s, r = np.sinh(a * x) / np.sinh(a * L), np.sinh(a * (L - x)) / np.sinh(a * L)
        want = [s, x / L * s, r, (1 - x / L) * r]
    else:
        a5, a6 = rs.roots
        den = np.sinh(a5 * L) * np.sin(a6 * L)
        want = [np.sinh(a5 * x) * np.sin(a6 * x) / den,
                np.sinh(a5 * x) * np.sin(a6 * (L - x)) / den,
                np.sinh(a5 * (L - x)) * np.sin(a6 * x) / den,
                np.sinh(a5 * (L - x)) * np.sin(a6 * (L - x)) / den]
    assert np.allclose(got, want, rtol=1e-12, atol=1e-14)


def test_alternative_span_when_oscillation_degenerates():
    from dataclasses import replace
    c = constants_for(base_spec(SCHEMES["1a"]))
    # choose constants so that alpha6 * L = pi exactly at beta = 0
    s = complex(-math.pi**2 + 4.0, 2 * 2.0 * math.pi)  # (2 + i pi)^2
    D_h = 1.0
    G_ph = 2 * s.real
    k = abs(s) ** 2
    c = replace(c, D_h=D_h, G_ph=G_ph, k=k, Delta_h=G_ph**2 - 4 * D_h * k)
    rs = w_roots_beta(0.0, c)
    assert rs.regime is Regime.COMPLEX_PAIR
    assert rs.roots[1] == pytest.approx(math.pi)
    assert complex_degenerate(rs, 1.0)
    tab = w_profile_table(rs, 1, np.linspace(0, 1, 11), 1.0)
    assert np.all(np.isfinite(tab))


def test_no_overflow_for_thin_plate():
    spec = base_spec(SCHEMES["2b"], 20)
    cat = build_catalog(spec, constants_for(spec))
    X, Y = cat.tables(np.linspace(0, 1, 101), np.linspace(0, 1, 101))
    assert np.all(np.isfinite(X)) and np.all(np.isfinite(Y))
    assert cat.alpha_max > 300


@pytest.mark.parametrize("M,N", [(1, 1), (2, 3), (5, 4)])
def test_catalog_layout(M, N):
    spec = base_spec(SCHEMES["1a"], M, N)
    cat = build_catalog(spec, constants_for(spec))
    assert cat.n03 == 16 + M * N
    assert cat.size - cat.n03 == 6 * N + 6 * M + 4
    assert cat.ids[0] == BasisId("CornerW", (1, 1))
    assert cat.ids[16] == BasisId("InternalW", (1, 1))
    assert cat.ids[cat.n03] == BasisId("BoundaryW_x1", (1, 1))
    assert cat.family_slice("BoundaryPsi_x2").stop == cat.size
    assert int(cat.is_psi.sum()) == 2 * (N + 1) + 2 * (M + 1)


def test_eval_basis_caps_psi_derivatives():
    spec = base_spec(SCHEMES["1a"], 2)
    cat = build_catalog(spec, constants_for(spec))
    with pytest.raises(ValueError):
        eval_basis(BasisId("BoundaryPsi_x1", (1, 1)), cat, (0.5, 0.5), (2, 1))
    with pytest.raises(ValueError):
        eval_basis(BasisId("InternalW", (1, 1)), cat, (0.5, 0.5), (4, 1))
    v = eval_basis(BasisId("InternalW", (1, 1)), cat, (0.5, 0.5), (0, 0))
    assert v == pytest.approx(1.0)


def test_psi_profile_edge_values():
    tab1 = psi_profile_table(30.0, 1, np.array([0.0, 1.0]), 1.0, 0)
    tab2 = psi_profile_table(30.0, 2, np.array([0.0, 1.0]), 1.0, 0)
    assert np.allclose(tab1[0], [0, 1]) and np.allclose(tab2[0], [1, 0])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 800.0), st.integers(1, 400))
def test_sinh_kernels_agree(alpha, nx):
    x = np.linspace(0.0, 1.0, nx)
    a = kernels.sinh_ratio_derivs_numpy(alpha, x, 1.0, 4)
    b = kernels.sinh_ratio_derivs_numba(alpha, x, 1.0, 4)
    assert np.all(np.isfinite(a))
    assert np.allclose(a, b, rtol=1e-13, atol=0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(1, 6), st.integers(0, 2**31))
def test_hadamard_kernels_agree(n, nc, seed):
    r = np.random.default_rng(seed)
    Ix = r.standard_normal((3, 3, n, n))
    Iy = r.standard_normal((3, 3, n, n))
    idx = [r.integers(0, 3, nc) for _ in range(4)]
    coef = r.standard_normal((nc, 2, 2))
    types = r.integers(0, 2, n)
    a = kernels.hadamard_combine_numpy(Ix, Iy, *idx, coef, types)
    b = kernels.hadamard_combine_numba(Ix, Iy, *idx, coef, types)
    # explicit loop as the oracle
    want = np.zeros((n, n))
    for c in range(nc):
        for i in range(n):
            for j in range(n):
                want[i, j] += (coef[c, types[i], types[j]] * Ix[idx[0][c], idx[1][c], i, j]
                               * Iy[idx[2][c], idx[3][c], i, j])
    assert np.allclose(a, want) and np.allclose(b, want)


def test_eval_w_boundary_shape():
    rs = _roots("real")
    assert eval_w_boundary_1d(rs, 1, 0.5, 1.0).shape == ()
    with pytest.raises(ValueError):
        w_profile_table(rs, 5, np.zeros(2), 1.0)
