"""Acceptance criteria, each at its fixed tolerance.

One PASS/FAIL line per criterion is printed as the test runs and repeated
in the terminal summary. ``dpsim verify`` runs the same checks.
"""

import pytest

from dpsim.verification import CHECKS, run_check

RESULTS = []


@pytest.mark.slow
@pytest.mark.parametrize("key", list(CHECKS))
def test_criterion(key, capsys):
    res = run_check(key)
    RESULTS.append(res)
    with capsys.disabled():
        print("\n" + res.line())
        for note in res.notes:
            print(f"       note: {note}")
    assert res.passed, res.detail
