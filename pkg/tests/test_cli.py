import csv
import json

import pytest

from reissner_fsm import cli
from reissner_fsm.cli import ConfigError, echo_config, parse_config_text, parse_terms

SOLVE_CFG = """\
command: solve
geometry: {a: 2.0, b: 1.5, h: 0.2}
material: {E: 2.0e5, mu: 0.25}
foundation: {kr: 10.0, gpr: 2.0}
load: {q0: 3.0}
truncation: {M: 3, N: 2}
edges:
  x1a: {kind: C}
  x10: {kind: S, Mn: 0.5}
  x2b: {kind: F}
  x20: {kind: C}
"""


def test_minimal_reference_config():
    exp = parse_config_text("command: solve\nscheme: 1a\n")
    assert exp.command == "solve" and exp.scheme == "1a"
    assert exp.grid == 101 and exp.order == 8


def test_full_model_config():
    exp = parse_config_text(SOLVE_CFG)
    m = exp.model
    assert (m.geometry.a, m.geometry.b, m.geometry.h) == (2.0, 1.5, 0.2)
    assert m.bc_string == "CSFC"
    assert (m.M, m.N) == (3, 2)
    assert float(m.edges["x10"].trace("Mn")(0.3)) == 0.5


def test_edges_shorthand():
    text = SOLVE_CFG.split("edges:")[0] + "edges: SSFF\n"
    assert parse_config_text(text).model.bc_string == "SSFF"


def test_terms_sequence():
    assert parse_terms("2,3,5,10,15,20") == (2, 3, 5, 10, 15, 20)
    assert parse_config_text("command: convergence\nterms: 2,3,5,10,15,20\n").terms == (
        2, 3, 5, 10, 15, 20)
    with pytest.raises(ConfigError):
        parse_terms("2,x")
    with pytest.raises(ConfigError):
        parse_terms("0,3")


def test_malformed_numeric_reports_line():
    bad = SOLVE_CFG.replace("a: 2.0", "a: two")
    with pytest.raises(ConfigError, match=r"line 2: geometry.a expects float"):
        parse_config_text(bad)


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="unknown key 'geometry.c'"):
        parse_config_text(SOLVE_CFG.replace("h: 0.2", "h: 0.2, c: 1"))


def test_missing_keys_listed():
    with pytest.raises(ConfigError, match="geometry.h"):
        parse_config_text("command: solve\ngeometry: {a: 1, b: 1}\nmaterial: {E: 1}\nedges: CCCC\n")


def test_edge_data_must_match_kind():
    with pytest.raises(ConfigError, match="does not prescribe"):
        parse_config_text(SOLVE_CFG.replace("x20: {kind: C}", "x20: {kind: C, Mn: 1}"))


def test_echo_round_trip():
    exp = parse_config_text(SOLVE_CFG)
    again = parse_config_text(echo_config(exp))
    assert again.raw == exp.raw
    assert again.model.bc_string == exp.model.bc_string


def test_solve_writes_fields_and_is_deterministic(tmp_path):
    exp = parse_config_text(SOLVE_CFG + "output: {grid: 11}\n")
    m1 = cli.run(exp, str(tmp_path / "a"))
    cli.run(exp, str(tmp_path / "b"))
    fa = (tmp_path / "a" / "fields.csv").read_bytes()
    assert fa == (tmp_path / "b" / "fields.csv").read_bytes()
    rows = list(csv.reader(fa.decode().splitlines()))
    assert rows[0] == ["x1", "x2", "w", "bx1", "bx2", "Mx1", "Mx2", "Mx1x2", "Qx1", "Qx2", "qe"]
    assert len(rows) - 1 == 121
    assert "e" in rows[1][2]
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["cases"][0]["regime"] in ("RealDistinct", "RealDouble", "ComplexPair")
    assert m1["files"] == ["fields.csv"]


def test_convergence_csv_rows(tmp_path):
    code = cli.main(["--output", str(tmp_path), "convergence", "--scheme", "1a",
                     "--terms", "2,3", "--grid", "11"])
    assert code == cli.EXIT_OK
    rows = list(csv.reader((tmp_path / "errors_1a.csv").read_text().splitlines()))
    assert rows[0] == ["terms", "field", "e", "eI", "eB", "eC"]
    assert len(rows) - 1 == 2 * 5


def test_sweep_outputs(tmp_path):
    code = cli.main(["--output", str(tmp_path), "sweep", "--gpr", "160,300",
                     "--terms", "2", "--grid", "11"])
    assert code == cli.EXIT_OK
    lines = (tmp_path / "regimes.csv").read_text().splitlines()
    assert [l.split(",")[2] for l in lines[1:]] == ["ComplexPair", "RealDistinct"]
    assert (tmp_path / "fields_gpr160.csv").exists()
    assert (tmp_path / "reference_gpr300.csv").exists()


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    cfg = tmp_path / "c.yaml"
    cfg.write_text("command: solve\nscheme: 1a\ntruncation: {M: 2}\noutput: {grid: 5}\n")
    assert cli.main(["solve", "--config", str(cfg)]) == cli.EXIT_OK
    assert (tmp_path / "env" / "fields.csv").exists()


@pytest.mark.parametrize("text,code", [
    ("command: solve\ngeometry: {a: x}\n", cli.EXIT_CONFIG),
    ("command: bogus\n", cli.EXIT_CONFIG),
    ("command: solve\nscheme: 9z\n", cli.EXIT_CONFIG),
])
def test_exit_codes(tmp_path, text, code):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(text)
    assert cli.main(["--output", str(tmp_path), "solve", "--config", str(cfg)]) == code


def test_missing_config_file(tmp_path):
    assert cli.main(["solve", "--config", str(tmp_path / "nope.yaml")]) == cli.EXIT_CONFIG


def test_refinement_cap_exit(tmp_path, monkeypatch):
    import reissner_fsm.quadrature as quad
    monkeypatch.setattr(quad, "MAX_PANELS", 5)
    monkeypatch.setattr(quad.rule_1d, "__defaults__", (8, 4, 1, 5))
    monkeypatch.setattr(quad.build_quadrature, "__defaults__", (8, 4, 1, 5))
    cfg = tmp_path / "c.yaml"
    cfg.write_text("command: solve\nscheme: 1a\ntruncation: {M: 3}\n")
    assert cli.main(["--output", str(tmp_path), "solve", "--config", str(cfg)]) == cli.EXIT_REFINEMENT
