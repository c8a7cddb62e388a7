from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualaoi import analytic as an
from dualaoi import markov as mk
from dualaoi.markov import MmState as S

RATE_PAIRS = [(F(1), F(1)), (F(1), F(2)), (F(3), F(7)), (F(5, 2), F(1, 3))]
rates = st.floats(min_value=0.1, max_value=10.0)


def _xi(a, b):
    # normalizer that makes the occurrence probabilities sum to one
    s = a + b
    nums = [a**3 * b / s**2, a**2 * b**2 / s**2, a**3 * b / s**2, a**3 / s, a**2 * b**2 / s**2,
            a**2 * b**2 / s**2, a * b**3 / s**2, a**2 * b**2 / s**2, a * b**3 / s**2, b**3 / s]
    return sum(nums)


def _expected_occurrence(a, b):
    s, xi = a + b, _xi(a, b)
    return {
        1: a**3 * b / (xi * s**2),
        2: a**2 * b**2 / (xi * s**2),
        3: a**3 * b / (xi * s**2),
        4: a**3 / (xi * s),
        5: a**2 * b**2 / (xi * s**2),
        6: a**2 * b**2 / (xi * s**2),
        7: a * b**3 / (xi * s**2),
        8: a**2 * b**2 / (xi * s**2),
        9: a * b**3 / (xi * s**2),
        10: b**3 / (xi * s),
    }


def _expected_cases(a, b):
    """The 13 A-started cases: (triple, P_c, E[TY], E[Y^2])."""
    s, xi = a + b, _xi(a, b)
    one, two, six = F(1) / s**2, F(2) / s**2, F(6) / s**2
    A0, A1, B0, B1 = S.A0, S.A1, S.B0, S.B1
    return [
        ((A0, A1, A0), a**4 * b**2 / (xi * s**4), two, six),
        ((A0, A1, A1), a**4 * b / (xi * s**3), one, two),
        ((A0, A1, B1), a**3 * b**3 / (xi * s**4), two, six),
        ((A0, B0, A0), a**3 * b**2 / (xi * s**3), two, two),
        ((A0, B0, B1), a**2 * b**3 / (xi * s**3), two, two),
        ((A1, A0, A1), a**4 * b / (xi * s**3), two, two),
        ((A1, A0, B0), a**3 * b**2 / (xi * s**3), two, two),
        ((A1, A1, A0), a**4 * b / (xi * s**3), two, six),
        ((A1, A1, A1), a**4 / (xi * s**2), one, two),
        ((A1, A1, B1), a**3 * b**2 / (xi * s**3), two, six),
        ((A1, B1, A1), a**4 * b**2 / (xi * s**4), two, six),
        ((A1, B1, B0), a**3 * b**3 / (xi * s**4), two, six),
        ((A1, B1, B1), a**2 * b**3 / (xi * s**3), one, two),
    ]


@pytest.mark.parametrize("a, b", RATE_PAIRS)
def test_path_table_rows(a, b):
    s = a + b
    rows = {r.path_index: r for r in mk.mm_path_table(a, b)}
    assert rows[3].prob == a * b / s**2
    assert rows[5].prob == b**2 / s**2
    assert rows[8].prob == a**2 / s**2
    assert (rows[2].mean_service, rows[2].mean_interarrival, rows[2].second_moment_interarrival) == (2 / s, 1 / s, 2 / s**2)
    assert (rows[9].mean_service, rows[9].mean_interarrival, rows[9].second_moment_interarrival) == (2 / s, 2 / s, 6 / s**2)
    # each state's outgoing probabilities sum to one
    for q in S:
        assert sum(r.prob for r in rows.values() if r.from_state is q) == 1


@pytest.mark.parametrize("a, b", RATE_PAIRS)
def test_occurrence_probabilities_exact(a, b):
    P = mk.mm_path_probabilities(a, b)
    assert P == _expected_occurrence(a, b)
    assert sum(P.values()) == 1


@pytest.mark.parametrize("a, b", RATE_PAIRS)
def test_steady_state_exact(a, b):
    pi = mk.mm_steady_state(a, b)
    assert sum(pi) == 1
    M = [[F(x) for x in row] for row in mk._transition_rows(a, b)]
    for j in range(4):
        assert sum(pi[i] * M[i][j] for i in range(4)) == pi[j]


def test_steady_state_unit_rates():
    assert mk.mm_steady_state(F(1), F(1)) == (F(1, 6), F(1, 3), F(1, 6), F(1, 3))


@given(rates, rates)
def test_steady_state_numeric_matches(a, b):
    assert np.allclose(mk.mm_steady_state_numeric(a, b), mk.mm_steady_state(a, b), rtol=0, atol=1e-12)


@given(rates, rates)
def test_transition_matrix_is_stochastic(a, b):
    M = mk.mm_transition_matrix(a, b)
    assert M.shape == (4, 4)
    assert np.all(M >= 0)
    assert np.allclose(M.sum(axis=1), 1.0, atol=1e-14)


@pytest.mark.parametrize("a, b", RATE_PAIRS)
def test_two_step_table_first_half_exact(a, b):
    cases = mk.mm_two_step_table(a, b)
    assert len(cases) == 26
    for case, (triple, p, ety, ey2) in zip(cases[:13], _expected_cases(a, b)):
        assert case.triple == triple
        assert case.prob == p
        assert case.mean_service_times_interarrival == ety
        assert case.second_moment == ey2
    assert sum(c.prob for c in cases) == 1


@pytest.mark.parametrize("a, b", RATE_PAIRS)
def test_two_step_mirror_symmetry(a, b):
    # case c + 13 at (a, b) is case c at (b, a) with A and B swapped
    cases = mk.mm_two_step_table(a, b)
    swapped = mk.mm_two_step_table(b, a)
    swap = {S.A0: S.B0, S.A1: S.B1, S.B0: S.A0, S.B1: S.A1}
    for c in range(13):
        mirror, base = cases[c + 13], swapped[c]
        assert mirror.triple == tuple(swap[q] for q in base.triple)
        assert mirror.prob == base.prob
        assert mirror.mean_service_times_interarrival == base.mean_service_times_interarrival
        assert mirror.second_moment == base.second_moment


@pytest.mark.parametrize("a, b", RATE_PAIRS)
def test_chain_reproduces_closed_forms_exactly(a, b):
    assert mk.mm_peak_aoi_markov(a, b) == an.mm_peak_aoi(a, b)
    assert mk.mm_avg_aoi_graphical(a, b) == an.mm_avg_aoi(a, b)


@given(rates, rates)
def test_chain_reproduces_closed_forms_float(a, b):
    assert mk.mm_avg_aoi_graphical(a, b) == pytest.approx(an.mm_avg_aoi(a, b), rel=1e-12)
    assert mk.mm_peak_aoi_markov(a, b) == pytest.approx(an.mm_peak_aoi(a, b), rel=1e-12)


def test_mean_interarrival_is_inverse_effective_rate():
    a, b = F(2), F(3)
    assert mk.mm_mean_interarrival(a, b) == 1 / an.mm_effective_rate(a, b)


@pytest.mark.parametrize(
    "prev, sensor, gen, other, expected",
    [
        (None, "A", 1.0, 2.0, (S.A0, None)),
        (None, "B", 1.0, 0.5, (S.B1, None)),
        (S.A0, "A", 1.0, 0.5, (S.A1, 1)),
        (S.A0, "B", 1.0, 2.0, (S.B0, 2)),
        (S.A1, "A", 1.0, 2.0, (S.A0, 3)),
        (S.A1, "A", 1.0, 0.5, (S.A1, 4)),
        (S.A1, "B", 1.0, 0.5, (S.B1, 5)),
        (S.B0, "A", 1.0, 2.0, (S.A0, 6)),
        (S.B0, "B", 1.0, 0.5, (S.B1, 7)),
        (S.B1, "A", 1.0, 0.5, (S.A1, 8)),
        (S.B1, "B", 1.0, 2.0, (S.B0, 9)),
        (S.B1, "B", 1.0, 0.5, (S.B1, 10)),
    ],
)
def test_classify_refresh(prev, sensor, gen, other, expected):
    assert mk.classify_refresh(prev, sensor, gen, other) == expected


@pytest.mark.parametrize(
    "prev, sensor, other",
    [(S.A0, "A", 2.0), (S.B0, "B", 2.0), (S.A0, "C", 0.0)],
)
def test_classify_refresh_rejects_impossible(prev, sensor, other):
    # A0 means B already holds a newer update, so A cannot refresh into A0 again
    with pytest.raises(ValueError):
        mk.classify_refresh(prev, sensor, 1.0, other)


def test_path_table_unit_rates():
    rows = {r.path_index: r for r in mk.mm_path_table(F(1), F(1))}
    r1, r3 = rows[1], rows[3]
    assert (r1.prob, r1.mean_service, r1.mean_interarrival, r1.second_moment_interarrival) == (F(1, 2),) * 4
    assert (r3.prob, r3.mean_service, r3.mean_interarrival, r3.second_moment_interarrival) == (F(1, 4), 1, 1, F(3, 2))
