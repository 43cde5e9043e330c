from __future__ import annotations

import numpy as np
import pytest

from vertex_bethe.bethe import solve_bethe
from vertex_bethe.sklyanin import ModelParams, build_basis, spin_rep
from vertex_bethe.transfer import ModelContext

BETHE_CASES = [(1, 2), (1, 4), (2, 2)]  # (2l, N)


@pytest.fixture(scope="session")
def spin_half() -> ModelParams:
    return ModelParams.default(1)


@pytest.fixture(scope="session")
def spin_one() -> ModelParams:
    return ModelParams.default(2)


@pytest.fixture(scope="session")
def reps():
    """(params, basis, S) for 2l = 1, 2, 3, built once."""
    out = {}
    for two_ell in (1, 2, 3):
        p = ModelParams.default(two_ell)
        basis = build_basis(two_ell, p.tau)
        out[two_ell] = (p, basis, spin_rep(p, basis))
    return out


@pytest.fixture(scope="session")
def bethe_states():
    """Ground-state solutions with their contexts, keyed by (2l, N)."""
    out = {}
    for two_ell, N in BETHE_CASES:
        p = ModelParams.default(two_ell, N=N)
        out[(two_ell, N)] = (ModelContext(p), solve_bethe(p))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

_CRITERIA: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = "; ".join(f"{k} {v}" for k, v in report.user_properties)
        _CRITERIA[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        status, detail = _CRITERIA[name]
        number, label = name[len("test_criterion_"):].split("_", 1)
        terminalreporter.write_line(f"CRITERION {int(number):2d} {label}: {status}  {detail}")
