"""Acceptance gate: every shipped criterion at its pinned tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` for the pass/fail ledger,
or ``helfrich verify`` for the same checks from the command line.
"""

import pytest

from helfrich import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA,
                         ids=[fn.__name__ for fn in acceptance.CRITERIA])
def test_acceptance_criterion(criterion):
    result = criterion()
    mark = "PASS" if result.passed else "FAIL"
    print(f"[{mark}] {result.id} {result.name}: {result.detail} "
          f"({result.elapsed:.1f}s)")
    assert result.passed, f"{result.id} {result.name}: {result.detail}"
