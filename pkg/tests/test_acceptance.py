"""Acceptance criteria at their stated tolerances; prints one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines live; they are
also written to the terminal summary.
"""

import pytest

from spectral_mra import acceptance

_lines = []


@pytest.fixture(scope="module", autouse=True)
def report(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None and _lines:
        tr.write_sep("=", "acceptance criteria")
        for line in _lines:
            tr.write_line(line)


@pytest.mark.slow
@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion):
    res = criterion()
    _lines.append(res.line())
    print(res.line())
    assert res.passed, res.detail
