import math

import mpmath as mp
import numpy as np
import pytest

from bladeprog.fatigue import SNCurve, DamageParams, cycles_to_failure
from bladeprog.windload import YEAR_SECONDS, LoadBlock, LoadSpectrum


def q_oracle(v, x):
    """Regularized upper incomplete gamma at 40 digits (mpmath, quadrature fallback)."""
    with mp.workdps(40):
        v = mp.mpf(v)
        x = mp.mpf(x)
        try:
            return float(mp.gammainc(v, x, mp.inf, regularized=True))
        except mp.libmp.libhyper.NoConvergence:
            lg = mp.loggamma(v)
            f = lambda t: mp.exp((v - 1) * mp.log(t) - t - lg)
            pts = [x] + [p for p in (v - 1 - 10 * mp.sqrt(v), v - 1, v - 1 + 10 * mp.sqrt(v))
                         if p > x] + [mp.inf]
            return float(mp.quad(f, pts))


def constant_schedule(life_years=25.0, stress=718.0, horizon=25, curve=SNCurve()):
    """Yearly schedule at one amplitude whose total life is ``life_years``."""
    N = cycles_to_failure(stress, curve)
    annual = LoadSpectrum((LoadBlock(stress, N / life_years),), YEAR_SECONDS)
    return [annual] * horizon, N


@pytest.fixture
def blade_curve():
    return SNCurve(1.816, 8.097, 1.0, 1548.0)


@pytest.fixture
def b01_params():
    return DamageParams.from_b(0.1)


# --- acceptance reporting --------------------------------------------------

_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _RESULTS.append((number, title, report.outcome.upper(), round(report.duration, 2)))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_RESULTS):
        status = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({duration:.2f} s)")
