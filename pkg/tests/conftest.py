import re

import numpy as np
import pytest

from infogeom import ExponentialFamily, RankError

_CRITERIA = {}


def random_family(rng, m_max=8, n_max=3):
    """Minimal family with m <= m_max outcomes, n <= n_max statistics in [-1, 1]."""
    while True:
        m = int(rng.integers(2, m_max + 1))
        n = int(rng.integers(1, min(n_max, m - 1) + 1))
        try:
            return ExponentialFamily.from_stats(rng.uniform(-1.0, 1.0, (m, n)))
        except RankError:
            continue


def random_theta(rng, fam, bound=2.0):
    return rng.uniform(-bound, bound, fam.n)


def max_rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_c(\d+)_(\w+)", report.nodeid)
    if not m or report.when not in ("setup", "call"):
        return
    if report.when == "call" or report.failed:
        detail = dict(report.user_properties).get("detail", "")
        _CRITERIA[int(m.group(1))] = (m.group(2), report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        name, ok, detail = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} {name:<28s} {'PASS' if ok else 'FAIL'}  {detail}")
