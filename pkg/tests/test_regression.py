"""Frozen error levels from the first verified run. A drift in either
direction means the numerics changed and the baselines need review."""

import json
from pathlib import Path

import pytest

from reissner_fsm.validation import (SCHEMES, SWEEP_GPR, navier_problem, reference_problem,
                                     run_case, run_multiscale_sweep)

BASE = json.loads((Path(__file__).parent / "baselines.json").read_text())
RTOL = 0.05


def test_navier_error_levels():
    spec, ora = navier_problem(SCHEMES["4b"], 3)
    got = run_case(spec, ora).report.errors
    for f, v in BASE["criterion_4"]["e"].items():
        assert got[f]["e"] == pytest.approx(v, rel=RTOL)


@pytest.mark.parametrize("sid", ["2b", "2d", "3e", "4a", "4b", "4c"])
def test_scheme_error_levels(sid):
    spec, ref = reference_problem(SCHEMES[sid], 10)
    got = run_case(spec, ref).report.errors["w"]["e"]
    assert got == pytest.approx(BASE["criterion_8"]["e_w_M10"][sid], rel=RTOL)


def test_sweep_error_levels():
    out = run_multiscale_sweep(1e4, SWEEP_GPR, 20)
    for o, v in zip(out, BASE["criterion_6"]["eI_w"]):
        assert o["result"].report.errors["w"]["eI"] == pytest.approx(v, rel=RTOL)
