import math

import pytest

from dualaoi import analytic as an
from dualaoi.sim import conditional_md_oracle, replay_oracle


def test_replay_by_hand():
    # refreshes at t=1 (gen 0.5) and t=3 (gen 2), one stale delivery at t=2
    r = replay_oracle([(1.0, 0.5), (2.0, 0.2), (3.0, 2.0)], horizon_end=4.0)
    # age: t on [0,1], t-0.5 on [1,3], t-2 on [3,4]
    assert r.area == pytest.approx(0.5 + 3.0 + 1.5)
    assert r.peaks == [1.0, 2.5]
    assert r.avg_aoi == pytest.approx(1.25)
    assert r.avg_paoi == 1.75


def test_replay_tie_is_obsolete():
    # generated at the initial refresh instant: no refresh
    r = replay_oracle([(1.0, 0.0)], horizon_end=2.0)
    assert r.peaks == []
    assert r.area == 2.0


def test_replay_periodic_pair():
    # two period-1 sensors half a period apart
    log = sorted([(float(t), float(t - 1)) for t in range(1, 201)] + [(t + 0.5, t - 0.5) for t in range(1, 200)])
    r = replay_oracle(log, start=1.0, start_refresh=0.0, horizon_end=200.0)
    assert r.avg_aoi == pytest.approx(1.25, rel=1e-12)
    assert r.avg_paoi == pytest.approx(1.5, rel=1e-12)


def test_replay_errors():
    with pytest.raises(ValueError, match="sorted"):
        replay_oracle([(2.0, 0.0), (1.0, 0.0)])
    with pytest.raises(ValueError, match="after its delivery"):
        replay_oracle([(1.0, 2.0)])
    with pytest.raises(ValueError, match="horizon"):
        replay_oracle([(1.0, 0.0)], horizon_end=0.5)
    with pytest.raises(ValueError, match="before the start"):
        replay_oracle([(1.0, 0.0)], start=2.0)


def test_replay_empty():
    r = replay_oracle([], horizon_end=2.0)
    assert r.area == 2.0
    assert math.isnan(r.avg_paoi)


@pytest.mark.parametrize("k, n", [(0, 0), (0, 1), (0, 3), (1, 0), (1, 1), (2, 2), (3, 1), (4, 4)])
def test_conditional_oracle_matches_tables(k, n):
    est = conditional_md_oracle(1.0, 1.0, k, n, samples=40_000, seed=1000 + 10 * k + n)
    tab = an.md_state_expectation(1.0, 1.0, k, n)
    assert est.peak_count == pytest.approx(tab.peak_count, rel=1e-12)
    assert abs(est.peak_sum - tab.peak_sum) < 4 * est.peak_sum_se + 1e-12
    assert abs(est.area - tab.area) < 4 * est.area_se + 1e-12


@pytest.mark.parametrize("k, n", [(1, 2), (2, 0)])
def test_conditioning_routes_agree(k, n):
    # uniform order statistics vs. rejection sampling of the Poisson process
    u = conditional_md_oracle(1.3, 0.9, k, n, samples=20_000, seed=7, method="uniform")
    r = conditional_md_oracle(1.3, 0.9, k, n, samples=20_000, seed=8, method="rejection")
    se = math.hypot(u.area_se, r.area_se)
    assert abs(u.area - r.area) < 4 * se
    se = math.hypot(u.peak_sum_se, r.peak_sum_se)
    assert abs(u.peak_sum - r.peak_sum) < 4 * se


def test_conditional_oracle_argument_checks():
    with pytest.raises(ValueError):
        conditional_md_oracle(1, 1, -1, 0)
    with pytest.raises(ValueError):
        conditional_md_oracle(1, 1, 0, 0, samples=0)
    with pytest.raises(ValueError):
        conditional_md_oracle(1, 1, 0, 0, method="bogus")


def test_replay_single_delivery():
    # ramp 0 -> 1 (area 0.5), refresh to age 0.5, ramp to 1.5 (area 1.0)
    r = replay_oracle([(1.0, 0.5)], horizon_end=2.0)
    assert r.area == pytest.approx(1.5)
    assert r.avg_aoi == pytest.approx(0.75)
