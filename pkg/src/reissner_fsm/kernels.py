"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``REISSNER_FSM_JIT=0`` before import to force the numpy path (numba
is also skipped automatically when it is not installed). Both paths are
always importable as ``*_numpy`` / ``*_numba`` so they can be compared.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_JIT = numba is not None and os.environ.get("REISSNER_FSM_JIT", "1").lower() not in (
    "0", "false", "no", "off")


def sinh_ratio_derivs_numpy(alpha: float, x: np.ndarray, L: float, dmax: int) -> np.ndarray:
    """Derivatives 0..dmax of ``sinh(alpha x) / sinh(alpha L)``.

    Evaluated as ``exp(alpha (x - L)) (1 -+ exp(-2 alpha x)) / (1 - exp(-2 alpha L))``
    so nothing overflows for large ``alpha L``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((dmax + 1,) + x.shape)
    lead = np.exp(alpha * (x - L)) / (-np.expm1(-2.0 * alpha * L))
    e = np.exp(-2.0 * alpha * x)
    s = lead * (-np.expm1(-2.0 * alpha * x))
    c = lead * (1.0 + e)
    p = 1.0
    for d in range(dmax + 1):
        out[d] = p * (s if d % 2 == 0 else c)
        p *= alpha
    return out


def hadamard_combine_numpy(Ix, Iy, pa, pb, ra, rb, coef, types):
    """``K[i,j] = sum_c coef[c, t_i, t_j] * Ix[pa_c, pb_c, i, j] * Iy[ra_c, rb_c, i, j]``."""
    n = Ix.shape[-1]
    K = np.zeros((n, n))
    ti = types[:, None]
    tj = types[None, :]
    for c in range(len(pa)):
        C = coef[c][ti, tj]
        K += C * (Ix[pa[c], pb[c]] * Iy[ra[c], rb[c]])
    return K


if numba is not None:

    @numba.njit(cache=True)
    def sinh_ratio_derivs_numba(alpha, x, L, dmax):
        n = x.shape[0]
        out = np.empty((dmax + 1, n))
        den = -np.expm1(-2.0 * alpha * L)
        for i in range(n):
            lead = np.exp(alpha * (x[i] - L)) / den
            e = np.exp(-2.0 * alpha * x[i])
            s = lead * (-np.expm1(-2.0 * alpha * x[i]))
            c = lead * (1.0 + e)
            p = 1.0
            for d in range(dmax + 1):
                out[d, i] = p * (s if d % 2 == 0 else c)
                p *= alpha
        return out

    @numba.njit(cache=True)
    def hadamard_combine_numba(Ix, Iy, pa, pb, ra, rb, coef, types):
        n = Ix.shape[-1]
        nc = pa.shape[0]
        K = np.zeros((n, n))
        # combination outermost so each pass streams two contiguous slabs
        for c in range(nc):
            X = Ix[pa[c], pb[c]]
            Y = Iy[ra[c], rb[c]]
            for i in range(n):
                ti = types[i]
                for j in range(n):
                    cc = coef[c, ti, types[j]]
                    if cc != 0.0:
                        K[i, j] += cc * X[i, j] * Y[i, j]
        return K

else:  # pragma: no cover
    sinh_ratio_derivs_numba = None
    hadamard_combine_numba = None


def sinh_ratio_derivs(alpha, x, L, dmax):
    x = np.ascontiguousarray(x, dtype=float)
    if USE_JIT and x.ndim == 1:
        return sinh_ratio_derivs_numba(float(alpha), x, float(L), int(dmax))
    return sinh_ratio_derivs_numpy(alpha, x, L, dmax)


def hadamard_combine(Ix, Iy, pa, pb, ra, rb, coef, types):
    args = (np.ascontiguousarray(Ix), np.ascontiguousarray(Iy),
            np.ascontiguousarray(pa, dtype=np.int64), np.ascontiguousarray(pb, dtype=np.int64),
            np.ascontiguousarray(ra, dtype=np.int64), np.ascontiguousarray(rb, dtype=np.int64),
            np.ascontiguousarray(coef, dtype=float), np.ascontiguousarray(types, dtype=np.int64))
    if USE_JIT:
        return hadamard_combine_numba(*args)
    return hadamard_combine_numpy(*args)


def backend() -> str:
    return "numba" if USE_JIT else "numpy"
