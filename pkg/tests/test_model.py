import math

import numpy as np
import pytest

from reissner_fsm.model import (EDGE_NAMES, EdgeCondition, Foundation, Geometry, Material,
                                ModelSpec, Scaling, SpecError, constants_for,
                                derive_constants, nondimensionalize, regime_preserved,
                                uniform_load, validate_spec)
from reissner_fsm.spectra import Regime, classify_regime


def plate(kinds="CCCC", a=1.0, b=1.0, h=0.1, E=1.0e4, mu=0.3, foundation=None, q0=1.0):
    edges = {e: EdgeCondition(k) for e, k in zip(EDGE_NAMES, kinds)}
    return ModelSpec(Geometry(a, b, h), Material(E, mu),
                     foundation or Foundation(k_r=1.0, G_pr=1.0), uniform_load(q0), edges, 3, 3)


def test_constants_direct_substitution():
    c = derive_constants(Geometry(1, 1, 1), Material(12.0, 0.0), Foundation(k=10.0, G_p=5.0))
    assert c.D == pytest.approx(1.0)
    assert c.G == pytest.approx(6.0)
    assert c.C_s == pytest.approx(5.0)
    assert c.c_q == pytest.approx(0.2)
    assert c.D_h == pytest.approx(2.0)
    assert c.G_ph == pytest.approx(7.0)
    assert c.Delta_h == pytest.approx(-31.0)


def test_reference_parameters_real_root_regime():
    mu, h = 0.3, 0.1
    c = derive_constants(Geometry(1, 1, h), Material(12 * (1 - mu**2) / h**3, mu),
                         Foundation(k_r=1e4, G_pr=300.0))
    # c_q by hand, then the discriminant
    c_q = (2 - 0.3) * 0.01 / (10 * 0.7)
    D_h, G_ph = 1 + c_q * 300, 300 + c_q * 1e4
    assert c.c_q == pytest.approx(c_q)
    assert c.Delta_h == pytest.approx(G_ph**2 - 4 * D_h * 1e4)
    assert c.Delta_h > 0
    assert classify_regime(c) is Regime.REAL_DISTINCT


def test_foundation_inputs_are_exclusive():
    with pytest.raises(SpecError):
        Foundation(k=1.0, k_r=1.0).resolve(1.0, 1.0)
    with pytest.raises(SpecError):
        validate_spec(plate(foundation=Foundation(G_p=1.0, G_pr=2.0)))


def test_validate_collects_every_problem():
    spec = plate(a=-1.0, mu=0.6, E=-1.0)
    with pytest.raises(SpecError) as err:
        validate_spec(spec)
    assert len(err.value.problems) == 3


def test_unsupported_free_plate_is_singular():
    with pytest.raises(SpecError, match="rigid-body"):
        validate_spec(plate("FFFF", foundation=Foundation(k=0.0, G_p=0.0)))


def test_thickness_warning():
    with pytest.warns(UserWarning):
        validate_spec(plate(h=0.6))


def test_edge_condition_rejects_foreign_quantity():
    with pytest.raises(SpecError):
        EdgeCondition("C", {"Mn": lambda s: s})
    with pytest.raises(SpecError):
        EdgeCondition("X")


def test_edge_condition_fills_zero_traces():
    ec = EdgeCondition("F")
    assert set(ec.data) == {"Qn", "Mn", "Mnt"}
    assert np.all(ec.trace("Mn")(np.linspace(0, 1, 5)) == 0.0)


def test_nondimensionalize_maps_to_unit_scale():
    spec = plate(a=2.0, b=3.0, h=0.2, E=2.0e5, foundation=Foundation(k=50.0, G_p=3.0), q0=7.0)
    scaled, scale = nondimensionalize(spec)
    c0, c1 = constants_for(spec), constants_for(scaled)
    assert scaled.geometry.a == 1.0
    assert scaled.geometry.b == pytest.approx(1.5)
    assert c1.D == pytest.approx(1.0)
    assert c1.k == pytest.approx(c0.k * 2.0**4 / c0.D)
    assert c1.G_p == pytest.approx(c0.G_p * 2.0**2 / c0.D)
    assert scaled.load(0.3, 0.4) == pytest.approx(7.0 / scale.pressure)
    assert scaled.load.q0 == pytest.approx(7.0 / scale.pressure)
    assert regime_preserved(spec)


def test_nondimensionalize_is_idempotent():
    scaled, _ = nondimensionalize(plate(a=2.0, h=0.3, E=3.0))
    again, s2 = nondimensionalize(scaled)
    assert s2.length == 1.0 and s2.D == pytest.approx(1.0)
    assert again.geometry == scaled.geometry


def test_scaling_factors():
    s = Scaling(length=2.0, D=8.0)
    assert s.factor("w") == 2.0
    assert s.factor("bx1") == 1.0
    assert s.factor("Mx1") == 4.0
    assert s.factor("Qx2") == 2.0
    assert s.factor("qe") == 1.0
    with pytest.raises(KeyError):
        s.factor("nope")


def test_with_truncation_and_bc_string():
    spec = plate("CSFC")
    assert spec.bc_string == "CSFC"
    assert spec.with_truncation(7, 5).M == 7
    assert math.isclose(constants_for(spec).D, 1e4 * 0.001 / (12 * 0.91))
