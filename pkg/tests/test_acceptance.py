"""Acceptance suite: one test per criterion, each at its stated tolerance and time limit.

Every check prints a single ``[PASS]``/``[FAIL]`` line to the terminal, so the
report is visible even when pytest captures output.
"""

import pytest

from dualaoi import validation as v

CRITERIA = [
    (1, v.check_point_values),
    (2, v.check_reductions),
    (3, v.check_graphical_equivalence),
    (4, v.check_md_series),
    (5, v.check_sim_vs_analytic),
    (6, v.check_path_statistics),
    (7, v.check_steady_state),
    (8, v.check_simplex_volume),
    (9, v.check_conditional_tables),
    (10, v.check_orderings),
    (11, v.check_preemptive),
]


def test_every_criterion_is_covered():
    assert [n for n, _ in CRITERIA] == list(range(1, 12))
    assert {c for _, c in CRITERIA} == set(v.ALL_CHECKS)


@pytest.mark.parametrize("number, check", CRITERIA, ids=[f"criterion_{n:02d}" for n, _ in CRITERIA])
def test_acceptance(number, check, capsys):
    result = check()
    with capsys.disabled():
        print(f"\n{result.line()}")
    assert result.number == number
    assert result.passed, result.detail
    assert result.within_time, f"took {result.seconds:.1f}s, limit {result.time_limit}s"
