"""Every acceptance criterion at its stated tolerance, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -s`` to see the lines as they finish; they
are also repeated in the terminal summary.  ``python3 tests/test_acceptance.py``
runs the same checks without pytest.
"""

import pytest

from rclattice import acceptance as acc

REPORT: list[str] = []

CRITERIA = [
    acc.exact_stationarity,
    acc.cftp_exactness,
    acc.monotonicity,
    acc.cut_edge_equivalence,
    acc.duality,
    acc.spatial_mixing,
    acc.mixing_scaling,
    acc.connectivity_decay,
]


@pytest.mark.slow
@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion{i}_{f.__name__}" for i, f in
                                                 enumerate(CRITERIA, 1)])
def test_criterion(check):
    result = acc.timed(check)
    line = result.line()
    REPORT.append(line)
    print(line)
    assert result.passed, line


if __name__ == "__main__":
    import sys

    results = [acc.timed(f) for f in CRITERIA]
    for r in results:
        print(r.line(), flush=True)
    sys.exit(0 if all(r.passed for r in results) else 1)
