"""Shared numeric helpers for the test suite."""

import numpy as np

from reissner_fsm.reduction import field_rows


def operator_residual(cat, terms, x1, x2, cols):
    """Residual of a linear differential operator applied to basis columns,
    relative to the sum of magnitudes of its individual terms."""
    res = field_rows(cat, "", x1, x2, terms)[:, cols]
    mag = np.zeros_like(res)
    for key, val in terms.items():
        mag += np.abs(field_rows(cat, "", x1, x2, {key: val})[:, cols])
    return np.abs(res) / np.maximum(mag, 1e-300)


def w_operator(c):
    return {(4, 0): (c.D_h, 0.0), (2, 2): (2 * c.D_h, 0.0), (0, 4): (c.D_h, 0.0),
            (2, 0): (-c.G_ph, 0.0), (0, 2): (-c.G_ph, 0.0), (0, 0): (c.k, 0.0)}


def psi_operator(c):
    return {(2, 0): (0.0, 1.0), (0, 2): (0.0, 1.0), (0, 0): (0.0, -10.0 / c.h**2)}


def boundary_columns(cat):
    w = np.r_[cat.family_slice("BoundaryW_x1"), cat.family_slice("BoundaryW_x2")]
    psi = np.r_[cat.family_slice("BoundaryPsi_x1"), cat.family_slice("BoundaryPsi_x2")]
    return w, psi
