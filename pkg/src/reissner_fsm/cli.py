"""Command line driver: configuration parsing, experiment runs, CSV output.

Exit codes
----------
0  success
2  configuration or usage error
3  singular system (reduction or stiffness matrix)
4  quadrature refinement cap reached
5  validation suite finished with failing checks
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, kernels
from .model import (EDGE_NAMES, EDGE_QUANTITIES, EdgeCondition, Foundation, Geometry,
                    Material, ModelSpec, SpecError, uniform_load)
from .quadrature import GAUSS_ORDER, RefinementCapError
from .reduction import FIELDS, SingularReductionError
from .solve import DEFAULT_GRID, FieldGrids, SingularSystemError, solve_spec

log = logging.getLogger("reissner_fsm")

OUTPUT_ENV = "REISSNER_FSM_OUTPUT"
EXIT_OK, EXIT_CONFIG, EXIT_SINGULAR, EXIT_REFINEMENT, EXIT_VALIDATION = 0, 2, 3, 4, 5
COMMANDS = ("solve", "convergence", "sweep", "validate")
FIELD_HEADER = ("x1", "x2") + FIELDS
ERROR_HEADER = ("terms", "field", "e", "eI", "eB", "eC")

# dotted key -> expected type
SCHEMA = {
    "command": str, "scheme": str, "terms": list, "mu": float,
    "geometry.a": float, "geometry.b": float, "geometry.h": float,
    "material.E": float, "material.mu": float,
    "foundation.kr": float, "foundation.gpr": float,
    "foundation.k": float, "foundation.Gp": float,
    "load.kind": str, "load.q0": float,
    "truncation.M": int, "truncation.N": int,
    "sweep.kr": float, "sweep.gpr": list, "sweep.M": int,
    "output.dir": str, "output.grid": int,
    "quadrature.order": int, "quadrature.refine": int,
}
for _e in EDGE_NAMES:
    SCHEMA[f"edges.{_e}.kind"] = str
    for _q in sorted({q for qs in EDGE_QUANTITIES.values() for q in qs}):
        SCHEMA[f"edges.{_e}.{_q}"] = float


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    command: str
    model: ModelSpec | None = None
    scheme: str | None = None
    terms: tuple = (2, 3, 5, 10, 15, 20)
    mu: float = 0.3
    sweep_kr: float = 1e4
    sweep_gpr: tuple = (160.0, 170.0, 180.0, 190.0, 300.0)
    sweep_M: int = 20
    output: str | None = None
    grid: int = DEFAULT_GRID
    order: int = GAUSS_ORDER
    refine: int = 1
    raw: dict = field(default_factory=dict)


# --- parsing -----------------------------------------------------------------

def _flatten(node, prefix=""):
    """Dotted keys of a composed YAML mapping with their scalar nodes."""
    out = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = f"{prefix}{k.value}"
            if isinstance(v, yaml.MappingNode):
                out.update(_flatten(v, key + "."))
            else:
                out[key] = v
    return out


def _scalar(node):
    return yaml.SafeLoader("").construct_object(node, deep=True)


def _convert(key, node, typ):
    line = node.start_mark.line + 1
    value = _scalar(node)
    try:
        if typ is float:
            if isinstance(value, bool):
                raise ValueError
            v = float(value)
            if not math.isfinite(v):
                raise ValueError
            return v
        if typ is int:
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ValueError
            return int(float(value))
        if typ is list:
            if isinstance(value, str):
                value = [s for s in value.replace(" ", "").split(",") if s]
            if not isinstance(value, list):
                value = [value]
            return [float(v) for v in value]
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"line {line}: {key} expects {typ.__name__}, got {node.value!r}") from None


def parse_terms(text) -> tuple:
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    try:
        terms = tuple(int(float(t)) for t in items if str(t).strip())
    except ValueError:
        raise ConfigError(f"terms must be a comma separated list of integers, got {text!r}") from None
    if not terms or min(terms) < 1:
        raise ConfigError(f"terms must be positive integers, got {text!r}")
    return terms


def parse_config_text(text: str, source: str = "<config>") -> ExperimentSpec:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: malformed YAML: {exc}") from None
    if root is None:
        raise ConfigError(f"{source}: empty configuration")
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError(f"{source}: top level must be a mapping")
    nodes = _flatten(root)
    # "edges: CCCC" shorthand
    if "edges" in nodes:
        node = nodes.pop("edges")
        kinds = str(_scalar(node))
        if len(kinds) != 4 or any(k not in "CSF" for k in kinds):
            raise ConfigError(f"line {node.start_mark.line + 1}: edges shorthand must be four "
                              f"letters from C, S, F, got {kinds!r}")
        for e, k in zip(EDGE_NAMES, kinds):
            nodes.setdefault(f"edges.{e}.kind", yaml.ScalarNode("tag:yaml.org,2002:str", k,
                                                                node.start_mark, node.end_mark))
    unknown = sorted(k for k in nodes if k not in SCHEMA)
    if unknown:
        line = nodes[unknown[0]].start_mark.line + 1
        raise ConfigError(f"line {line}: unknown key {unknown[0]!r}"
                          + (f" (and {unknown[1:]})" if len(unknown) > 1 else ""))
    cfg = {k: _convert(k, n, SCHEMA[k]) for k, n in nodes.items()}
    return build_experiment(cfg)


def parse_config(path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config_text(text, str(path))


def build_experiment(cfg: dict) -> ExperimentSpec:
    command = cfg.get("command", "solve")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
    exp = ExperimentSpec(command=command, raw=dict(cfg))
    exp.mu = cfg.get("material.mu", cfg.get("mu", exp.mu))
    exp.output = cfg.get("output.dir")
    exp.grid = cfg.get("output.grid", exp.grid)
    exp.order = cfg.get("quadrature.order", exp.order)
    exp.refine = cfg.get("quadrature.refine", exp.refine)
    if "terms" in cfg:
        exp.terms = parse_terms(cfg["terms"])
    if exp.grid < 2:
        raise ConfigError("output.grid must be >= 2")
    if command == "convergence":
        exp.scheme = cfg.get("scheme", "1a")
    elif command == "sweep":
        exp.sweep_kr = cfg.get("sweep.kr", exp.sweep_kr)
        exp.sweep_gpr = tuple(cfg.get("sweep.gpr", exp.sweep_gpr))
        exp.sweep_M = cfg.get("sweep.M", exp.sweep_M)
    elif command == "solve":
        exp.scheme = cfg.get("scheme")
        if exp.scheme is None:
            exp.model = _model_from(cfg)
    return exp


def _model_from(cfg: dict) -> ModelSpec:
    required = ["geometry.a", "geometry.b", "geometry.h", "material.E"]
    missing = [k for k in required if k not in cfg]
    missing += [f"edges.{e}.kind" for e in EDGE_NAMES if f"edges.{e}.kind" not in cfg]
    if missing:
        raise ConfigError(f"missing required keys: {missing}")
    phys = "foundation.k" in cfg or "foundation.Gp" in cfg
    nond = "foundation.kr" in cfg or "foundation.gpr" in cfg
    if phys and nond:
        raise ConfigError("foundation: give either (k, Gp) or (kr, gpr), not both")
    foundation = (Foundation(k=cfg.get("foundation.k", 0.0), G_p=cfg.get("foundation.Gp", 0.0))
                  if phys else Foundation(k_r=cfg.get("foundation.kr", 0.0),
                                          G_pr=cfg.get("foundation.gpr", 0.0)))
    kind = cfg.get("load.kind", "uniform")
    if kind != "uniform":
        raise ConfigError(f"load.kind must be 'uniform' for solve, got {kind!r}")
    edges = {}
    try:
        for e in EDGE_NAMES:
            k = cfg[f"edges.{e}.kind"]
            data = {}
            for q in EDGE_QUANTITIES.get(k, ()):
                if f"edges.{e}.{q}" in cfg:
                    data[q] = _constant_trace(cfg[f"edges.{e}.{q}"])
            extra = [q for q in (key.split(".")[2] for key in cfg if key.startswith(f"edges.{e}."))
                     if q != "kind" and q not in EDGE_QUANTITIES.get(k, ())]
            if extra:
                raise ConfigError(f"edges.{e}: kind {k} does not prescribe {extra}")
            edges[e] = EdgeCondition(k, data, source="config")
        return ModelSpec(Geometry(cfg["geometry.a"], cfg["geometry.b"], cfg["geometry.h"]),
                         Material(cfg["material.E"], cfg.get("material.mu", 0.3)), foundation,
                         uniform_load(cfg.get("load.q0", 1.0)), edges,
                         cfg.get("truncation.M", 10), cfg.get("truncation.N", cfg.get("truncation.M", 10)))
    except SpecError as exc:
        raise ConfigError(str(exc)) from None


def _constant_trace(v):
    def trace(s):
        return np.full(np.shape(s), v, dtype=float)
    trace.value = v
    return trace


def echo_config(exp: ExperimentSpec) -> str:
    """YAML that parses back to an equivalent experiment."""
    nested: dict = {}
    for key, value in sorted(exp.raw.items()):
        node = nested
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return yaml.safe_dump(nested, sort_keys=True)


# --- output ------------------------------------------------------------------

def _fmt(v) -> str:
    return f"{v:.17e}" if isinstance(v, float) else str(v)


def write_fields_csv(path, grids: FieldGrids) -> int:
    X1, X2 = np.meshgrid(grids.x1, grids.x2, indexing="ij")
    cols = [X1.ravel(), X2.ravel()] + [grids[n].ravel() for n in FIELDS]
    data = np.column_stack(cols)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(FIELD_HEADER) + "\n")
        np.savetxt(fh, data, fmt="%.17e", delimiter=",")
    return data.shape[0]


def write_errors_csv(path, reports) -> int:
    n = 0
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(ERROR_HEADER) + "\n")
        for rep in reports:
            for row in rep.rows():
                fh.write(",".join(_fmt(v) for v in row) + "\n")
                n += 1
    return n


def _output_dir(exp: ExperimentSpec, override: str | None) -> Path:
    d = Path(override or os.environ.get(OUTPUT_ENV) or exp.output or "results")
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {d}: {exc}") from None
    return d


def _case_manifest(res) -> dict:
    d = {k: v for k, v in res.diagnostics.items()}
    d.update({"terms": res.terms, "regime": res.regime})
    return d


# --- commands ----------------------------------------------------------------

def run(exp: ExperimentSpec, outdir: str | None = None) -> dict:
    from . import validation as V

    out = _output_dir(exp, outdir)
    t0 = time.perf_counter()
    manifest = {"command": exp.command, "version": __version__, "backend": kernels.backend(),
                "python": platform.python_version(), "config": exp.raw, "files": [], "cases": []}

    if exp.command == "solve":
        if exp.scheme is not None:
            spec, _ = V.reference_problem(V.SCHEMES[exp.scheme], *_mn(exp), mu=exp.mu)
        else:
            spec = exp.model
        solved = solve_spec(spec, order=exp.order, refine=exp.refine)
        write_fields_csv(out / "fields.csv", solved.fields(exp.grid))
        manifest["files"].append("fields.csv")
        st = solved.state
        manifest["cases"].append({"regime": st.regime, "rcond": st.rcond, "residual": st.residual,
                                  "backward_error": st.backward_error,
                                  "reduction_rcond": solved.reduced.rcond, "timing": st.timing,
                                  "edges": solved.spec.bc_string,
                                  "basis_notes": list(solved.reduced.catalog.diagnostics)})
    elif exp.command == "convergence":
        if exp.scheme not in V.SCHEMES:
            raise ConfigError(f"unknown scheme {exp.scheme!r}; known: {sorted(V.SCHEMES)}")
        results = V.run_convergence_study(exp.scheme, exp.terms, exp.mu, exp.grid)
        name = f"errors_{exp.scheme}.csv"
        write_errors_csv(out / name, [r.report for r in results])
        manifest["files"].append(name)
        manifest["cases"] = [_case_manifest(r) for r in results]
    elif exp.command == "sweep":
        records = V.run_multiscale_sweep(exp.sweep_kr, exp.sweep_gpr, exp.sweep_M, exp.mu, exp.grid)
        lines = ["k_r,G_pr,regime,Delta_h,eI_w,e_w"]
        for r in records:
            res = r["result"]
            tag = f"gpr{r['G_pr']:g}"
            write_fields_csv(out / f"fields_{tag}.csv", res.computed)
            write_fields_csv(out / f"reference_{tag}.csv", _full(res.reference, res.computed))
            manifest["files"] += [f"fields_{tag}.csv", f"reference_{tag}.csv"]
            ew = res.report.errors["w"]
            lines.append(",".join([_fmt(r["k_r"]), _fmt(r["G_pr"]), r["regime"],
                                   _fmt(r["Delta_h"]), _fmt(ew["eI"]), _fmt(ew["e"])]))
            manifest["cases"].append({"G_pr": r["G_pr"], **_case_manifest(res)})
        (out / "regimes.csv").write_text("\n".join(lines) + "\n")
        manifest["files"].append("regimes.csv")
    elif exp.command == "validate":
        checks = validation_suite()
        manifest["checks"] = checks
        for c in checks:
            print(f"{'PASS' if c['ok'] else 'FAIL'} {c['name']}: {c['detail']}")
    manifest["elapsed"] = time.perf_counter() - t0
    (out / "config_echo.yaml").write_text(echo_config(exp))
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
    manifest["outdir"] = str(out)
    return manifest


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _mn(exp):
    M = exp.raw.get("truncation.M", 10)
    return M, exp.raw.get("truncation.N", M)


def _full(reference: FieldGrids, computed: FieldGrids) -> FieldGrids:
    missing = {n: np.full(computed.shape, np.nan) for n in FIELDS if n not in reference.fields}
    return FieldGrids(reference.x1, reference.x2, {**reference.fields, **missing})


def validation_suite() -> list[dict]:
    """Oracle checks that run in seconds."""
    from . import validation as V
    from .model import constants_for
    from .spectra import relative_char_residual, w_roots

    checks = []
    spec, ref = V.reference_problem(V.SCHEMES["1a"], 3)
    c = constants_for(spec)
    worst = 0.0
    for n in range(1, 21):
        rs = w_roots(n, c, 1.0)
        for eta in rs.eta():
            for z in (eta, -eta, eta.conjugate()):
                worst = max(worst, relative_char_residual(z, rs.beta, c))
    checks.append({"name": "characteristic roots (scheme 1a, n = 1..20)",
                   "ok": worst <= 1e-10, "detail": f"max relative residual {worst:.2e}"})
    rng = np.random.default_rng(0)
    x1, x2 = rng.random(100), rng.random(100)
    r = np.max(np.abs(ref.pde_residual(x1, x2, ref.load_lap))) / ref.q0
    checks.append({"name": "reference solution PDE residual", "ok": r <= 1e-8,
                   "detail": f"{r:.2e}"})
    nspec, nav = V.navier_problem(V.SCHEMES["1a"], 3)
    res = V.run_case(nspec, nav, 41)
    worst = max(res.report.errors[f]["e"] for f in ("w", "bx1", "bx2", "Mx1", "Mx2"))
    checks.append({"name": "Navier manufactured solution (SSSS, M = N = 3)", "ok": worst <= 1e-6,
                   "detail": f"max field error {worst:.2e}"})
    conv = V.run_convergence_study("1a", (3, 10), grid=41)
    e3, e10 = (r.report.errors["w"]["e"] for r in conv)
    checks.append({"name": "scheme 1a deflection error decreases", "ok": e10 < e3,
                   "detail": f"e(w) {e3:.2e} -> {e10:.2e}"})
    return checks


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reissner-fsm", description=__doc__.splitlines()[0])
    p.add_argument("--output", help=f"output directory (overrides ${OUTPUT_ENV})")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="solve one plate from a YAML config")
    s.add_argument("--config", required=True)
    s = sub.add_parser("convergence", help="error versus truncation for a scheme")
    s.add_argument("--scheme", default="1a")
    s.add_argument("--terms", default="2,3,5,10,15,20")
    s.add_argument("--mu", type=float, default=0.3)
    s.add_argument("--grid", type=int, default=DEFAULT_GRID)
    s = sub.add_parser("sweep", help="foundation shear sweep at fixed k_r")
    s.add_argument("--kr", type=float, default=1e4)
    s.add_argument("--gpr", default="160,170,180,190,300")
    s.add_argument("--terms", type=int, default=20)
    s.add_argument("--mu", type=float, default=0.3)
    s.add_argument("--grid", type=int, default=DEFAULT_GRID)
    sub.add_parser("validate", help="run the fast oracle checks")
    return p


def experiment_from_args(args) -> ExperimentSpec:
    if args.command == "solve":
        return parse_config(args.config)
    if args.command == "convergence":
        return build_experiment({"command": "convergence", "scheme": args.scheme,
                                 "terms": list(parse_terms(args.terms)), "mu": args.mu,
                                 "output.grid": args.grid})
    if args.command == "sweep":
        try:
            gpr = [float(v) for v in args.gpr.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--gpr must be a comma separated list of numbers, got {args.gpr!r}")
        return build_experiment({"command": "sweep", "sweep.kr": args.kr, "sweep.gpr": gpr,
                                 "sweep.M": args.terms, "mu": args.mu, "output.grid": args.grid})
    return build_experiment({"command": "validate"})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        exp = experiment_from_args(args)
        manifest = run(exp, args.output)
    except (ConfigError, SpecError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularReductionError, SingularSystemError) as exc:
        print(f"singular system: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except RefinementCapError as exc:
        print(f"refinement cap: {exc}", file=sys.stderr)
        return EXIT_REFINEMENT
    print(f"wrote {', '.join(manifest['files'] + ['manifest.json'])} to {manifest['outdir']}")
    if exp.command == "validate" and not all(c["ok"] for c in manifest["checks"]):
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
