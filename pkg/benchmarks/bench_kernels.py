"""Compare the numba and numpy paths of the hot kernels.

Run ``python3 benchmarks/bench_kernels.py [M]``. The stiffness kernel is
timed on the actual Gram tables of scheme 1a at truncation M = N.
"""

import sys
import time

import numpy as np

from reissner_fsm import kernels
from reissner_fsm.assembly import _combos, energy_pairs, gram_tables
from reissner_fsm.basis import build_catalog
from reissner_fsm.model import constants_for
from reissner_fsm.quadrature import build_quadrature
from reissner_fsm.reduction import reduce_catalog
from reissner_fsm.validation import SCHEMES, reference_problem


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(M=20):
    spec, _ = reference_problem(SCHEMES["1a"], M)
    c = constants_for(spec)
    cat = build_catalog(spec, c)
    red = reduce_catalog(cat, build_quadrature(spec.geometry, cat))
    _, _, Ix, Iy = gram_tables(red)
    pa, pb, ra, rb, coef = _combos(energy_pairs(c)["plate"])
    types = cat.is_psi.astype(np.int64)
    args = (Ix, Iy, pa, pb, ra, rb, coef, types)

    kernels.hadamard_combine_numba(*args)  # compile
    t_nb, K_nb = best_of(lambda: kernels.hadamard_combine_numba(*args))
    t_np, K_np = best_of(lambda: kernels.hadamard_combine_numpy(*args))
    diff = np.max(np.abs(K_nb - K_np)) / np.max(np.abs(K_np))
    print(f"hadamard_combine  n={cat.size:4d} combos={len(pa):3d}  "
          f"numba {t_nb * 1e3:8.2f} ms  numpy {t_np * 1e3:8.2f} ms  "
          f"speedup {t_np / t_nb:5.2f}x  max rel diff {diff:.1e}")

    x = np.linspace(0.0, 1.0, 20000)
    kernels.sinh_ratio_derivs_numba(40.0, x, 1.0, 4)
    t_nb, S_nb = best_of(lambda: kernels.sinh_ratio_derivs_numba(40.0, x, 1.0, 4))
    t_np, S_np = best_of(lambda: kernels.sinh_ratio_derivs_numpy(40.0, x, 1.0, 4))
    diff = np.max(np.abs(S_nb - S_np) / np.maximum(np.abs(S_np), 1e-300))
    print(f"sinh_ratio_derivs nx={x.size}           "
          f"numba {t_nb * 1e3:8.2f} ms  numpy {t_np * 1e3:8.2f} ms  "
          f"speedup {t_np / t_nb:5.2f}x  max rel diff {diff:.1e}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 20)
