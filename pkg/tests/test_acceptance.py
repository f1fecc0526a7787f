"""All acceptance criteria at their stated tolerances, one summary line each."""

import pytest

from product_cauchy import checks

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("num", sorted(checks.CRITERIA), ids=lambda n: checks.CRITERIA[n][0])
def test_criterion(num):
    result = checks.run_criterion(num)
    ACCEPTANCE_LINES[num] = result.line()
    print(result.line())
    assert result.passed, result.line()
