"""One test per acceptance criterion; each prints a single pass/fail line."""
import pytest

from cavitycorr.acceptance import CRITERIA, evaluate


@pytest.mark.slow
@pytest.mark.parametrize("number", [num for num, _, _ in CRITERIA], ids=lambda n: f"criterion{n}")
def test_criterion(number, record_acceptance):
    result = evaluate(number)
    print(result.line())
    record_acceptance(result.line())
    assert result.passed, result.line()
