"""Reference solutions, error metrics and the experiment protocols.

The reference deflection profiles are written here as finite sums of
complex exponentials ``c x^m exp(eta (x - s))``. That route shares no
evaluation code with :mod:`basis`, so agreement between the two is a real
check. Derived fields use explicit formulas rather than the solver rows.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .model import (EDGE_NAMES, EdgeCondition, Foundation, Geometry, Material, ModelSpec,
                    constants_for, uniform_load)
from .reduction import field_rows
from .solve import FieldGrids, Solved, solve_spec, uniform_grid
from .spectra import Regime, classify_regime, w_roots_beta

DEFAULT_MU = 0.3
REFERENCE_AMPLITUDE = 1e-3
ERROR_FIELDS = ("w", "bx1", "bx2", "Mx1", "Mx2")
TERMS = (2, 3, 5, 10, 15, 20)
SWEEP_GPR = (160.0, 170.0, 180.0, 190.0, 300.0)


# --- exponential sums --------------------------------------------------------

@dataclass(frozen=True)
class ExpTerm:
    """``coef * x**m * exp(eta * (x - shift))`` with m in {0, 1}."""

    coef: complex
    eta: complex
    shift: float = 0.0
    m: int = 0

    def deriv(self, x, n: int):
        e = np.exp(self.eta * (x - self.shift))
        if self.m == 0:
            return self.coef * self.eta**n * e
        lead = n * self.eta ** (n - 1) if n else 0.0
        return self.coef * (self.eta**n * x + lead) * e


def _eval(terms, x, n):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for t in terms:
        out += t.deriv(x, n)
    return out.real


def _sinh_ratio(a: complex, L: float, reflect: bool = False):
    """``sinh(a x) / sinh(a L)`` or ``sinh(a (L - x)) / sinh(a L)`` for Re a > 0."""
    den = 1.0 - cmath.exp(-2.0 * a * L)
    if not reflect:
        return [ExpTerm(1.0 / den, a, L), ExpTerm(-1.0 / den, -a, -L)]
    return [ExpTerm(1.0 / den, -a, 0.0), ExpTerm(-1.0 / den, a, 2.0 * L)]


def _sin(b: float, L: float, reflect: bool = False):
    """``sin(b x)`` or ``sin(b (L - x))``."""
    if not reflect:
        return [ExpTerm(-0.5j, 1j * b), ExpTerm(0.5j, -1j * b)]
    return [ExpTerm(-0.5j * cmath.exp(1j * b * L), -1j * b), ExpTerm(0.5j * cmath.exp(-1j * b * L), 1j * b)]


def _product(f, g):
    # g must be unshifted; its exponent moves onto f's shift
    out = []
    for s in f:
        for t in g:
            assert t.shift == 0.0 and t.m == 0 and s.m == 0
            coef = s.coef * t.coef * cmath.exp(t.eta * s.shift)
            out.append(ExpTerm(coef, s.eta + t.eta, s.shift))
    return out


def _times_x(f, scale):
    return [ExpTerm(t.coef * scale, t.eta, t.shift, 1) for t in f]


def reference_profiles(beta: float, consts, L: float) -> list:
    """The four homogeneous deflection profiles at wavenumber ``beta``,
    each as a list of :class:`ExpTerm`."""
    rs = w_roots_beta(beta, consts)
    if rs.regime is Regime.REAL_DISTINCT:
        a1, a2 = rs.roots
        return [_sinh_ratio(a1, L), _sinh_ratio(a1, L, True),
                _sinh_ratio(a2, L), _sinh_ratio(a2, L, True)]
    if rs.regime is Regime.REAL_DOUBLE:
        (a3,) = rs.roots
        left, right = _sinh_ratio(a3, L), _sinh_ratio(a3, L, True)
        return [left, _times_x(left, 1.0 / L), right, right + _times_x(right, -1.0 / L)]
    a5, a6 = rs.roots
    norm = 1.0 / math.sin(a6 * L)
    out = []
    for rs_, rt in ((False, False), (False, True), (True, False), (True, True)):
        p = _product(_sinh_ratio(a5, L, rs_), _sin(a6, L, rt))
        out.append([ExpTerm(t.coef * norm, t.eta, t.shift) for t in p])
    return out


# --- closed-form fields ------------------------------------------------------

class ClosedForm:
    """A deflection ``w(x1, x2)`` with analytic partials and psi = 0.

    Subclasses supply :meth:`dw`; everything else derives from it.
    """

    consts = None
    a = 1.0
    b = 1.0

    def dw(self, p: int, r: int, x1, x2):
        raise NotImplementedError

    def lap(self, x1, x2, p=0, r=0):
        return self.dw(p + 2, r, x1, x2) + self.dw(p, r + 2, x1, x2)

    def fields(self, x1, x2) -> dict:
        c = self.consts
        D, Cs, mu, rr = c.D, c.C_s, c.mu, c.D / c.C_s
        w = self.dw(0, 0, x1, x2)
        w1, w2 = self.dw(1, 0, x1, x2), self.dw(0, 1, x1, x2)
        L1, L2 = self.lap(x1, x2, 1, 0), self.lap(x1, x2, 0, 1)
        # rotations: -grad(w + (D/Cs) lap w)
        bx1 = -w1 - rr * L1
        bx2 = -w2 - rr * L2
        k11 = -self.dw(2, 0, x1, x2) - rr * self.lap(x1, x2, 2, 0)
        k22 = -self.dw(0, 2, x1, x2) - rr * self.lap(x1, x2, 0, 2)
        k12 = -self.dw(1, 1, x1, x2) - rr * self.lap(x1, x2, 1, 1)
        return {
            "w": w, "bx1": bx1, "bx2": bx2,
            "Mx1": D * (k11 + mu * k22), "Mx2": D * (k22 + mu * k11),
            "Mx1x2": D * (1.0 - mu) * k12,
            "Qx1": -D * L1, "Qx2": -D * L2,
            "qe": c.k * w - c.G_p * self.lap(x1, x2),
            "w1": w1, "w2": w2,
        }

    def grids(self, x1, x2, names=None) -> FieldGrids:
        X1, X2 = np.meshgrid(np.asarray(x1, float), np.asarray(x2, float), indexing="ij")
        f = self.fields(X1, X2)
        names = names or [n for n in f if n not in ("w1", "w2")]
        return FieldGrids(np.asarray(x1, float), np.asarray(x2, float), {n: f[n] for n in names})

    def load(self, x1, x2):
        raise NotImplementedError

    def pde_residual(self, x1, x2, load_lap) -> np.ndarray:
        """``L_pf w - L_q q`` evaluated from the analytic partials."""
        c = self.consts
        bih = self.dw(4, 0, x1, x2) + 2.0 * self.dw(2, 2, x1, x2) + self.dw(0, 4, x1, x2)
        lpf = c.D_h * bih - c.G_ph * self.lap(x1, x2) + c.k * self.dw(0, 0, x1, x2)
        return lpf - (self.load(x1, x2) - c.c_q * load_lap(x1, x2))

    def trace(self, edge: str, quantity: str):
        """Boundary trace of ``quantity`` along ``edge`` as a callable of the
        edge coordinate. ``Qn`` is the total transverse edge force
        ``Q_n + G_p dw/dn`` balanced by a free edge."""
        on_x1 = edge.startswith("x1")
        fixed = {"x1a": self.a, "x10": 0.0, "x2b": self.b, "x20": 0.0}[edge]
        name = {"Mn": "Mx1" if on_x1 else "Mx2", "Mnt": "Mx1x2"}.get(quantity, quantity)

        def f(s):
            s = np.asarray(s, dtype=float)
            x1, x2 = (np.full_like(s, fixed), s) if on_x1 else (s, np.full_like(s, fixed))
            fl = self.fields(x1, x2)
            if quantity == "Qn":
                return fl["Qx1"] + self.consts.G_p * fl["w1"] if on_x1 else \
                    fl["Qx2"] + self.consts.G_p * fl["w2"]
            return fl[name]
        return f

    def edge_conditions(self, kinds: str) -> dict:
        from .model import EDGE_QUANTITIES

        out = {}
        for edge, kind in zip(EDGE_NAMES, kinds):
            data = {q: self.trace(edge, q) for q in EDGE_QUANTITIES[kind]}
            out[edge] = EdgeCondition(kind, data, source=type(self).__name__)
        return out


class ReferenceSolution(ClosedForm):
    """``w = A a sum_l p_l(x1; beta) sin(beta x2) + D / (k a^3)`` with
    ``beta = pi / (2 b)`` and the uniform load ``q = D / a^3``."""

    def __init__(self, consts, geometry: Geometry, amplitude: float = REFERENCE_AMPLITUDE):
        if not consts.k > 0:
            raise ValueError("reference solution needs k > 0 (constant term D/(k a^3))")
        self.consts = consts
        self.a, self.b = geometry.a, geometry.b
        self.beta = math.pi / (2.0 * self.b)
        self.amplitude = amplitude * self.a
        self.regime = classify_regime(consts)
        self.profiles = reference_profiles(self.beta, consts, self.a)
        self.q0 = consts.D / self.a**3
        self.constant = consts.D / (consts.k * self.a**3)

    def profile(self, l: int, x, n: int = 0):
        return _eval(self.profiles[l - 1], x, n)

    def dw(self, p, r, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        P = sum(_eval(t, x1, p) for t in self.profiles)
        S = self.beta**r * np.sin(self.beta * np.asarray(x2, float) + r * math.pi / 2.0)
        out = self.amplitude * P * S
        if p == 0 and r == 0:
            out = out + self.constant
        return out

    def load(self, x1, x2):
        return np.full(np.broadcast(np.asarray(x1), np.asarray(x2)).shape, self.q0)

    def load_lap(self, x1, x2):
        return np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape)

    def load_callable(self):
        return uniform_load(self.q0)


class NavierOracle(ClosedForm):
    """Closed-form response to ``q = q0 sin(m pi x1 / a) sin(n pi x2 / b)``:
    ``w = q0 (1 + c_q lam) / (D_h lam^2 + G_ph lam + k) sin sin`` with
    ``lam = alpha_m^2 + beta_n^2``."""

    def __init__(self, consts, geometry: Geometry, mode=(1, 1), q0: float = 1.0):
        m, n = mode
        if m < 1 or n < 1:
            raise ValueError("Navier mode indices must be >= 1")
        self.consts = consts
        self.a, self.b = geometry.a, geometry.b
        self.am, self.bn = m * math.pi / self.a, n * math.pi / self.b
        self.q0 = q0
        lam = self.am**2 + self.bn**2
        c = consts
        self.amplitude = q0 * (1.0 + c.c_q * lam) / (c.D_h * lam**2 + c.G_ph * lam + c.k)

    def dw(self, p, r, x1, x2):
        return (self.amplitude * self.am**p * np.sin(self.am * np.asarray(x1, float) + p * math.pi / 2)
                * self.bn**r * np.sin(self.bn * np.asarray(x2, float) + r * math.pi / 2))

    def load(self, x1, x2):
        return self.q0 * np.sin(self.am * np.asarray(x1, float)) * np.sin(self.bn * np.asarray(x2, float))

    def load_lap(self, x1, x2):
        return -(self.am**2 + self.bn**2) * self.load(x1, x2)

    def load_callable(self):
        f = self.load
        lap = self.load_lap

        def load(x1, x2):
            return f(x1, x2)
        load.kind = "navier"
        load.laplacian = lap
        return load


def navier_oracle(mode, q0, consts, geometry) -> NavierOracle:
    return NavierOracle(consts, geometry, mode, q0)


def reference_solution(consts, geometry) -> ReferenceSolution:
    return ReferenceSolution(consts, geometry)


# --- error metrics -----------------------------------------------------------

@dataclass
class ErrorReport:
    terms: int
    errors: dict  # field -> {"e", "eI", "eB", "eC"}

    def rows(self):
        for name, e in self.errors.items():
            yield (self.terms, name, e["e"], e["eI"], e["eB"], e["eC"])


def point_masks(x1, x2, a=None, b=None):
    """Boolean masks (overall, internal, boundary, corner) on a tensor grid."""
    x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
    a = x1[-1] if a is None else a
    b = x2[-1] if b is None else b
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    tol = 1e-12 * max(a, b)
    d = 0.1 * min(a, b)
    on1 = (np.abs(X1) <= tol) | (np.abs(X1 - a) <= tol)
    on2 = (np.abs(X2) <= tol) | (np.abs(X2 - b) <= tol)
    internal = (X1 >= d - tol) & (X1 <= a - d + tol) & (X2 >= d - tol) & (X2 <= b - d + tol)
    corner = on1 & on2
    boundary = (on1 | on2) & ~corner
    return {"e": np.ones_like(X1, dtype=bool), "eI": internal, "eB": boundary, "eC": corner}


def relative_errors(computed: np.ndarray, reference: np.ndarray, masks: dict) -> dict:
    full = np.max(np.abs(reference))
    out = {}
    for key, m in masks.items():
        diff = np.linalg.norm((computed - reference)[m])
        den = np.linalg.norm(reference[m])
        if den < 1e-14:
            den = full * math.sqrt(max(int(m.sum()), 1))
        out[key] = float(diff / den) if den > 0 else float(diff)
    return out


def error_metrics(computed: FieldGrids, reference: FieldGrids, terms: int = 0,
                  names=ERROR_FIELDS) -> ErrorReport:
    if not computed.same_grid(reference):
        raise ValueError("computed and reference fields live on different grids")
    masks = point_masks(computed.x1, computed.x2)
    return ErrorReport(terms, {n: relative_errors(computed[n], reference[n], masks) for n in names})


# --- residuals ---------------------------------------------------------------

def pde_residual(solved: Solved, samples) -> dict:
    """Interior residuals of the two governing equations and boundary
    residuals of every prescribed edge quantity (nondimensional)."""
    cat = solved.reduced.catalog
    c = cat.consts
    x1, x2 = np.asarray(samples[0], float), np.asarray(samples[1], float)
    q = solved.state.q
    lpf = {(4, 0): (c.D_h, 0.0), (2, 2): (2 * c.D_h, 0.0), (0, 4): (c.D_h, 0.0),
           (2, 0): (-c.G_ph, 0.0), (0, 2): (-c.G_ph, 0.0), (0, 0): (c.k, 0.0)}
    lpsi = {(2, 0): (0.0, 1.0), (0, 2): (0.0, 1.0), (0, 0): (0.0, -10.0 / c.h**2)}
    load = solved.spec.load
    lq = np.asarray(load(x1, x2), float) - c.c_q * _load_laplacian(load, x1, x2)
    r_w = field_rows(cat, "", x1, x2, lpf) @ q - lq
    kw = np.abs(field_rows(cat, "w", x1, x2) @ q) * c.k
    scale_w = max(np.max(np.abs(lq)), np.max(kw), 1e-300)
    psi = field_rows(cat, "psi", x1, x2) @ q
    r_psi = field_rows(cat, "", x1, x2, lpsi) @ q
    scale_psi = max(np.max(np.abs(psi)) * 10.0 / c.h**2, 1e-300)
    out = {"w_max": float(np.max(np.abs(r_w)) / scale_w),
           "w_rms": float(np.sqrt(np.mean(r_w**2)) / scale_w),
           "psi_max": float(np.max(np.abs(r_psi)) / scale_psi) if np.any(psi) else 0.0,
           "edges": _boundary_residuals(solved)}
    return out


def _load_laplacian(load, x1, x2, h=1e-4):
    if hasattr(load, "laplacian"):
        return np.asarray(load.laplacian(x1, x2), float)
    if getattr(load, "kind", None) == "uniform":
        return np.zeros(np.broadcast(x1, x2).shape)
    f0 = np.asarray(load(x1, x2), float)
    return (load(x1 + h, x2) + load(x1 - h, x2) + load(x1, x2 + h) + load(x1, x2 - h)
            - 4.0 * f0) / h**2


def _boundary_residuals(solved: Solved, n: int = 41) -> dict:
    cat = solved.reduced.catalog
    c = cat.consts
    out = {}
    for edge in EDGE_NAMES:
        ec = solved.spec.edges[edge]
        L = cat.b if edge.startswith("x1") else cat.a
        s = np.linspace(0.0, L, n)[1:-1]
        on_x1 = edge.startswith("x1")
        fixed = {"x1a": cat.a, "x10": 0.0, "x2b": cat.b, "x20": 0.0}[edge]
        x1, x2 = (np.full_like(s, fixed), s) if on_x1 else (s, np.full_like(s, fixed))
        for quantity, fn in ec.data.items():
            if quantity == "Qn":
                qn = field_rows(cat, "Qx1" if on_x1 else "Qx2", x1, x2) @ solved.state.q
                wn = field_rows(cat, "w1" if on_x1 else "w2", x1, x2) @ solved.state.q
                val = qn + c.G_p * wn
            else:
                name = {"Mn": "Mx1" if on_x1 else "Mx2", "Mnt": "Mx1x2"}.get(quantity, quantity)
                val = field_rows(cat, name, x1, x2) @ solved.state.q
            ref = np.asarray(fn(s), float)
            den = max(np.max(np.abs(ref)), np.max(np.abs(val)), 1e-300)
            out[f"{edge}.{quantity}"] = float(np.max(np.abs(val - ref)) / den)
    return out


# --- schemes and protocols ---------------------------------------------------

@dataclass(frozen=True)
class Scheme:
    sid: str
    bc: str = "CCCC"
    k_r: float = 1.0
    G_pr: float = 1.0
    a_over_b: float = 1.0
    h_over_a: float = 0.1


SCHEMES = {s.sid: s for s in (
    Scheme("1a"), Scheme("1b", k_r=100.0, G_pr=10.0), Scheme("1c", k_r=1e4, G_pr=100.0),
    Scheme("1d", k_r=1e6, G_pr=2000.0),
    Scheme("2a"), Scheme("2b", h_over_a=0.01), Scheme("2c", h_over_a=0.2),
    Scheme("2d", h_over_a=0.4),
    Scheme("3a"), Scheme("3b", a_over_b=0.67), Scheme("3c", a_over_b=0.50),
    Scheme("3d", a_over_b=1.25), Scheme("3e", a_over_b=2.0),
    Scheme("4a"), Scheme("4b", bc="SSSS"), Scheme("4c", bc="FFFF"),
)}


def base_spec(scheme: Scheme, M: int = 10, N: int | None = None, mu: float = DEFAULT_MU,
              a: float = 1.0) -> ModelSpec:
    """Plate for ``scheme`` with homogeneous edges and no load; a = 1 and
    D = 1 unless ``a`` is given."""
    h = scheme.h_over_a * a
    geometry = Geometry(a=a, b=a / scheme.a_over_b, h=h)
    material = Material(E=12.0 * (1.0 - mu**2) / h**3, mu=mu)
    foundation = Foundation(k_r=scheme.k_r, G_pr=scheme.G_pr)
    edges = {e: EdgeCondition(k) for e, k in zip(EDGE_NAMES, scheme.bc)}
    return ModelSpec(geometry, material, foundation, uniform_load(0.0), edges, M,
                     M if N is None else N)


def reference_problem(scheme: Scheme, M: int, N: int | None = None, mu: float = DEFAULT_MU):
    """Scheme plate driven by the reference solution's load and edge data."""
    base = base_spec(scheme, M, N, mu)
    consts = constants_for(base)
    ref = ReferenceSolution(consts, base.geometry)
    spec = ModelSpec(base.geometry, base.material, base.foundation, ref.load_callable(),
                     ref.edge_conditions(scheme.bc), base.M, base.N)
    return spec, ref


def navier_problem(scheme: Scheme, M: int, N: int | None = None, mu: float = DEFAULT_MU,
                   mode=(1, 1), q0: float = 1.0, bc: str = "SSSS"):
    base = base_spec(scheme, M, N, mu)
    consts = constants_for(base)
    ref = NavierOracle(consts, base.geometry, mode, q0)
    spec = ModelSpec(base.geometry, base.material, base.foundation, ref.load_callable(),
                     ref.edge_conditions(bc), base.M, base.N)
    return spec, ref


@dataclass
class CaseResult:
    terms: int
    report: ErrorReport
    solved: Solved
    computed: FieldGrids
    reference: FieldGrids
    regime: str
    diagnostics: dict = field(default_factory=dict)


def run_case(spec: ModelSpec, ref: ClosedForm, grid: int = 101, order: int | None = None) -> CaseResult:
    solved = solve_spec(spec, order=order)
    computed = solved.fields(grid)
    x1, x2 = uniform_grid(spec.geometry.a, spec.geometry.b, grid)
    reference = ref.grids(x1, x2, list(computed.fields))
    report = error_metrics(computed, reference, spec.M)
    st = solved.state
    diag = {"rcond": st.rcond, "residual": st.residual, "backward_error": st.backward_error,
            "reduction_rcond": solved.reduced.rcond, "timing": st.timing,
            "basis_notes": list(solved.reduced.catalog.diagnostics)}
    return CaseResult(spec.M, report, solved, computed, reference, st.regime, diag)


def run_convergence_study(scheme: Scheme | str, terms=TERMS, mu: float = DEFAULT_MU,
                          grid: int = 101) -> list[CaseResult]:
    if isinstance(scheme, str):
        if scheme not in SCHEMES:
            raise KeyError(f"unknown scheme {scheme!r}; known: {sorted(SCHEMES)}")
        scheme = SCHEMES[scheme]
    out = []
    for t in terms:
        spec, ref = reference_problem(scheme, t, t, mu)
        out.append(run_case(spec, ref, grid))
    return out


def run_multiscale_sweep(k_r: float = 1e4, gpr_list=SWEEP_GPR, truncation: int = 20,
                         mu: float = DEFAULT_MU, grid: int = 101) -> list[dict]:
    out = []
    for g in gpr_list:
        scheme = Scheme(f"sweep-{g:g}", k_r=k_r, G_pr=g)
        spec, ref = reference_problem(scheme, truncation, truncation, mu)
        res = run_case(spec, ref, grid)
        out.append({"k_r": k_r, "G_pr": g, "regime": res.regime,
                    "Delta_h": ref.consts.Delta_h, "result": res})
    return out
