"""Acceptance gate: every criterion at full scale and its stated tolerance.

Each test prints a ``[PASS]``/``[FAIL]`` line; the lines are repeated in the
pytest terminal summary. Run standalone with ``python tests/test_acceptance.py``.
"""

import sys

import pytest

from cppok.verify import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES

# The closed-form Z2 variance slope omits the E[Z(1)]**2 Var[E(t)] term, so the
# simulated slope is twice the asymptote. The check stays at its tolerance and
# is expected to fail; see README "Known failing criterion".
KNOWN_FAILURES = {
    "z2_asymptotics": "variance slope asymptote omits the clock-variance term (simulated 4.0 vs 2.0)",
}


def _param(key):
    marks = []
    if key in KNOWN_FAILURES:
        marks.append(pytest.mark.xfail(reason=KNOWN_FAILURES[key], strict=True))
    return pytest.param(key, marks=marks, id=key)


@pytest.mark.parametrize("key", [_param(k) for k in CRITERIA])
def test_criterion(key, capsys):
    result = run_criterion(key, scale=1.0)
    ACCEPTANCE_LINES.append(result.line())
    with capsys.disabled():
        print(f"\n{result.line()}\n    {result.metrics}")
    assert result.passed, result.metrics


if __name__ == "__main__":
    results = [run_criterion(key) for key in CRITERIA]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
