"""Acceptance criteria 1-12 at full sample sizes.

Each test prints one PASS/FAIL line; the lines are repeated in the terminal
summary. Expect roughly half an hour on one core.
"""

import pytest

from halfline_walk import verify

CTX = verify.Context()
ROWS = {}


@pytest.mark.parametrize("cid", range(1, 13))
def test_criterion(cid, capsys):
    row = verify.run_criterion(cid, CTX)
    ROWS[cid] = row
    with capsys.disabled():
        print("\n" + row.line(), flush=True)
    assert row.passed, row.line()
