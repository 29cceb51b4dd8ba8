import numpy as np
import pytest

from reissner_fsm.basis import build_catalog
from reissner_fsm.model import constants_for
from reissner_fsm.quadrature import build_quadrature
from reissner_fsm.reduction import reduce_catalog
from reissner_fsm.validation import SCHEMES, base_spec, reference_problem

ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str):
    ACCEPTANCE[criterion] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})")


def reduced_for(spec):
    c = constants_for(spec)
    cat = build_catalog(spec, c)
    rule = build_quadrature(spec.geometry, cat)
    return c, reduce_catalog(cat, rule)


@pytest.fixture(scope="session")
def scheme1a_small():
    spec, ref = reference_problem(SCHEMES["1a"], 3)
    c, red = reduced_for(spec)
    return spec, ref, c, red


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
