"""Acceptance battery: the thirteen end-to-end checks, run one per test.

Each test prints a single PASS/FAIL line so the suite output doubles as a
scoreboard.  The same checks back `branchdyn verify-all`; here they also
get wall-clock budgets where the workload is large enough to matter.
"""

import time

import pytest

from branchdyn import battery

# seconds; checks without an entry just have to finish
TIME_BUDGETS = {
    1: 5.0,
    4: 60.0,
    7: 120.0,
    13: 30.0,
}


def _run(check):
    t0 = time.perf_counter()
    result = check()
    elapsed = time.perf_counter() - t0
    status = "PASS" if result.passed else "FAIL"
    print(f"[{result.number:2d}] {status} {result.name} ({elapsed:.2f}s)")
    return result, elapsed


@pytest.mark.parametrize(
    "check",
    battery.ALL_CHECKS,
    ids=[f"{i:02d}-{c.__name__[6:]}" for i, c in enumerate(battery.ALL_CHECKS, 1)],
)
def test_acceptance(check):
    result, elapsed = _run(check)
    assert result.number == battery.ALL_CHECKS.index(check) + 1
    assert result.passed, f"criterion {result.number}: {result.detail}"
    budget = TIME_BUDGETS.get(result.number)
    if budget is not None:
        assert elapsed < budget, (
            f"criterion {result.number} took {elapsed:.2f}s, budget {budget:.0f}s"
        )


def test_battery_is_complete():
    assert len(battery.ALL_CHECKS) == 13
    names = [check.__name__ for check in battery.ALL_CHECKS]
    assert len(set(names)) == 13
