"""Acceptance criteria at full scale; one PASS/FAIL line per criterion.

Run directly (``python tests/test_acceptance.py``) or under pytest, where the
lines are also collected into the terminal summary.
"""

import sys

import pytest

from flagcalc.selftest import CRITERIA, run_criterion

NUMBERS = [number for number, *_ in CRITERIA]


@pytest.mark.parametrize("number", NUMBERS)
def test_criterion(number, acceptance_lines):
    result = run_criterion(number, "full", seed=0)
    line = result.line()
    print(line)
    acceptance_lines.append(line)
    assert result.passed, f"{line}\n{result.details}"


if __name__ == "__main__":
    ok = True
    for number in NUMBERS:
        result = run_criterion(number, "full", seed=0)
        print(result.line(), flush=True)
        ok &= result.passed
    sys.exit(0 if ok else 1)
