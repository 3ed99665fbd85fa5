"""Acceptance gate: runs every criterion at its pinned tolerance and prints a
pass/fail line per criterion."""

import pytest

from gasket_solenoid.verify import ALL_CHECKS


@pytest.mark.parametrize("number,check", ALL_CHECKS, ids=[n for n, _ in ALL_CHECKS])
def test_acceptance_criterion(number, check):
    result = check()
    print(result.line())
    assert result.passed, result.line()
    assert result.seconds < result.limit
