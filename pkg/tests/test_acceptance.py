"""One test per acceptance criterion; each prints a PASS/FAIL line (run with -s to see them)."""
import pytest

from billiard_homotopy.verification import CHECKS, run_check


@pytest.mark.parametrize("number", [k for k, _, _ in CHECKS],
                         ids=[f"{k:02d}-{name.replace(' ', '-')}" for k, name, _ in CHECKS])
def test_criterion(number, capsys):
    res = run_check(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
