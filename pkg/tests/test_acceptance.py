"""The ten acceptance criteria at their stated tolerances and time limits.

Each test prints one [PASS]/[FAIL] line; the lines are also repeated, in order,
in the "acceptance criteria" section of the pytest terminal summary.
"""

import json

import pytest

from coupled_nls import acceptance

import conftest


@pytest.mark.parametrize("cid", sorted(acceptance.CRITERIA))
def test_criterion(cid):
    res = acceptance.CRITERIA[cid]()
    line = res.line()
    print(line)
    print(json.dumps(res.details, indent=1, default=str))
    conftest.ACCEPTANCE_LINES.append(line)
    assert res.cid == cid
    assert res.seconds < res.limit_seconds
    assert res.passed, f"{line}\n{json.dumps(res.details, indent=1, default=str)}"


def test_suites_cover_all_criteria():
    assert tuple(acceptance.FULL) == tuple(range(1, 11))
    assert set(acceptance.QUICK) <= set(acceptance.FULL)
