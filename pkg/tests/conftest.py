"""Shared fixtures: cached solver runs and the acceptance summary hook."""

import numpy as np
import pytest

from radial_euler.gas import GasParams, stretched_grid
from radial_euler.profiles import compressive_scenario, rarefaction_scenario
from radial_euler.solver import SolverConfig, run
from radial_euler.cli import ledger_from_initial
from radial_euler.verify import compression_threshold

RAREFACTION_MATRIX = [(g, m) for g in (1.4, 2.0, 2.5) for m in (1, 2)]
COMPRESSIVE_GRID = dict(zone=(1.17, 1.32), dr_fine=5e-5, dr_coarse=1e-3)
COMPRESSIVE_CONFIG = SolverConfig(snapshot_every=0.002, blowup_factor=4.0)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    n, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    item.config._acceptance[n] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        title, ok, detail = results[n]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))


class RunCache:
    """Lazily computed runs shared across the whole session."""

    def __init__(self):
        self._store = {}

    def rarefaction(self, gamma, m, n=1000):
        key = ("rare", gamma, m, n)
        if key not in self._store:
            sc = rarefaction_scenario(GasParams(gamma, 1.0, m))
            self._store[key] = run(sc, SolverConfig(snapshot_every=0.02), n=n)
        return self._store[key]

    def compressive_threshold(self):
        key = ("N",)
        if key not in self._store:
            base = compressive_scenario(GasParams(2.0, 1.0, 1), 0.0)
            self._store[key] = compression_threshold(ledger_from_initial(base))
        return self._store[key]

    def compressive(self, multiple, dr_fine=COMPRESSIVE_GRID["dr_fine"]):
        key = ("comp", multiple, dr_fine)
        if key not in self._store:
            N = self.compressive_threshold()
            sc = compressive_scenario(GasParams(2.0, 1.0, 1), -multiple * N)
            g = COMPRESSIVE_GRID
            r = stretched_grid(sc.left_edge(), sc.R, g["zone"], dr_fine, g["dr_coarse"])
            self._store[key] = run(sc, COMPRESSIVE_CONFIG, r=r)
        return self._store[key]


@pytest.fixture(scope="session")
def runs():
    return RunCache()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
