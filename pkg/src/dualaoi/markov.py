"""Refresh-state chain of the M-M system.

At every fresh delivery the monitor is in one of four states: which sensor
delivered (A or B) and whether the update the other sensor is currently
serving is still fresh (0) or already stale (1). Ten transition paths link
the states. Weighting the per-path statistics by the stationary
distribution gives a second, independent route to the closed-form M-M
results in :mod:`dualaoi.analytic`.

The functions use plain arithmetic, so ``fractions.Fraction`` rates give
exact rational tables.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from dualaoi.analytic import _positive


class MmState(enum.IntEnum):
    A0 = 0
    A1 = 1
    B0 = 2
    B1 = 3


# path index -> (from, to); this is also the classification table
PATHS: dict[int, tuple[MmState, MmState]] = {
    1: (MmState.A0, MmState.A1),
    2: (MmState.A0, MmState.B0),
    3: (MmState.A1, MmState.A0),
    4: (MmState.A1, MmState.A1),
    5: (MmState.A1, MmState.B1),
    6: (MmState.B0, MmState.A0),
    7: (MmState.B0, MmState.B1),
    8: (MmState.B1, MmState.A1),
    9: (MmState.B1, MmState.B0),
    10: (MmState.B1, MmState.B1),
}
PATH_OF: dict[tuple[MmState, MmState], int] = {v: k for k, v in PATHS.items()}

_SWAP = {MmState.A0: MmState.B0, MmState.A1: MmState.B1, MmState.B0: MmState.A0, MmState.B1: MmState.A1}


@dataclass(frozen=True)
class PathStats:
    path_index: int
    from_state: MmState
    to_state: MmState
    prob: float
    mean_service: float
    mean_interarrival: float
    second_moment_interarrival: float


@dataclass(frozen=True)
class TwoStepCase:
    """Two consecutive paths ``q -> q' -> q''``.

    ``mean_service_times_interarrival`` is ``E[T Y]`` with ``T`` the service
    time of the update delivered on the first step and ``Y`` the
    inter-refresh time of the second; ``second_moment`` is ``E[Y^2]`` of the
    second step.
    """

    case_index: int
    triple: tuple[MmState, MmState, MmState]
    paths: tuple[int, int]
    prob: float
    mean_service_times_interarrival: float
    second_moment: float


def mm_transition_matrix(mu_a: float, mu_b: float) -> np.ndarray:
    """Row-stochastic 4x4 matrix over ``(A0, A1, B0, B1)``."""
    rows = _transition_rows(mu_a, mu_b)
    return np.array([[float(x) for x in row] for row in rows])


def _transition_rows(mu_a, mu_b):
    _positive(mu_a=mu_a, mu_b=mu_b)
    s = mu_a + mu_b
    pa, pb = mu_a / s, mu_b / s
    zero = pa * 0
    return [
        [zero, pa, pb, zero],
        [mu_a * mu_b / s**2, pa, zero, mu_b**2 / s**2],
        [pa, zero, zero, pb],
        [zero, mu_a**2 / s**2, mu_a * mu_b / s**2, pb],
    ]


def mm_steady_state(mu_a: float, mu_b: float) -> tuple:
    """Stationary distribution of the refresh-state chain in closed form."""
    _positive(mu_a=mu_a, mu_b=mu_b)
    s = mu_a + mu_b
    xi = mu_a**2 + mu_a * mu_b + mu_b**2
    return (mu_a**2 * mu_b / (xi * s), mu_a**2 / xi, mu_a * mu_b**2 / (xi * s), mu_b**2 / xi)


def mm_steady_state_numeric(mu_a: float, mu_b: float) -> np.ndarray:
    """Solve ``pi = pi P`` with ``sum(pi) = 1`` directly (last equation replaced)."""
    P = mm_transition_matrix(mu_a, mu_b)
    A = P.T - np.eye(4)
    A[-1, :] = 1.0
    b = np.zeros(4)
    b[-1] = 1.0
    return np.linalg.solve(A, b)


def mm_path_table(mu_a: float, mu_b: float) -> list[PathStats]:
    """Per-path transition probability and moments of T and Y."""
    _positive(mu_a=mu_a, mu_b=mu_b)
    s = mu_a + mu_b
    one, two = 1 / s, 2 / s
    y2_short, y2_long = 2 / s**2, 6 / s**2
    # (p, E[T], E[Y], E[Y^2])
    rows = {
        1: (mu_a / s, one, one, y2_short),
        2: (mu_b / s, two, one, y2_short),
        3: (mu_a * mu_b / s**2, two, two, y2_long),
        4: (mu_a / s, one, one, y2_short),
        5: (mu_b**2 / s**2, one, two, y2_long),
        6: (mu_a / s, two, one, y2_short),
        7: (mu_b / s, one, one, y2_short),
        8: (mu_a**2 / s**2, one, two, y2_long),
        9: (mu_a * mu_b / s**2, two, two, y2_long),
        10: (mu_b / s, one, one, y2_short),
    }
    return [PathStats(l, *PATHS[l], *rows[l]) for l in sorted(rows)]


def mm_path_probabilities(mu_a: float, mu_b: float) -> dict[int, float]:
    """Long-run fraction of refreshes that happen via each path."""
    pi = mm_steady_state(mu_a, mu_b)
    return {row.path_index: pi[row.from_state] * row.prob for row in mm_path_table(mu_a, mu_b)}


def mm_mean_interarrival(mu_a: float, mu_b: float) -> float:
    """``E[Y]`` recomputed from the path table."""
    P = mm_path_probabilities(mu_a, mu_b)
    return sum(P[row.path_index] * row.mean_interarrival for row in mm_path_table(mu_a, mu_b))


def mm_mean_service(mu_a: float, mu_b: float) -> float:
    P = mm_path_probabilities(mu_a, mu_b)
    return sum(P[row.path_index] * row.mean_service for row in mm_path_table(mu_a, mu_b))


def mm_peak_aoi_markov(mu_a: float, mu_b: float) -> float:
    """Peak AoI as ``E[T] + E[Y]`` from the chain."""
    return mm_mean_service(mu_a, mu_b) + mm_mean_interarrival(mu_a, mu_b)


def _case_order(triple: tuple[MmState, MmState, MmState]) -> tuple:
    # cases starting in A-states come first, then their B mirrors in the same order
    first = triple[0]
    mirrored = first in (MmState.B0, MmState.B1)
    base = tuple(_SWAP[q] for q in triple) if mirrored else triple
    return (mirrored, tuple(int(q) for q in base))


def mm_two_step_table(mu_a: float, mu_b: float) -> list[TwoStepCase]:
    """All 26 feasible two-step cases, A-started ones first (indices 1..13).

    Each case is built from the path table: its probability is the
    occurrence probability of the first path times the transition
    probability of the second, and ``E[T Y]`` factors into the first path's
    mean service time and the second path's mean inter-refresh time.
    """
    table = {row.path_index: row for row in mm_path_table(mu_a, mu_b)}
    P = mm_path_probabilities(mu_a, mu_b)
    pairs = []
    for l1, r1 in table.items():
        for l2, r2 in table.items():
            if r2.from_state is r1.to_state:
                pairs.append(((r1.from_state, r1.to_state, r2.to_state), l1, l2))
    pairs.sort(key=lambda item: _case_order(item[0]))
    out = []
    for c, (triple, l1, l2) in enumerate(pairs, start=1):
        r1, r2 = table[l1], table[l2]
        out.append(
            TwoStepCase(
                case_index=c,
                triple=triple,
                paths=(l1, l2),
                prob=P[l1] * r2.prob,
                mean_service_times_interarrival=r1.mean_service * r2.mean_interarrival,
                second_moment=r2.second_moment_interarrival,
            )
        )
    return out


def mm_avg_aoi_graphical(mu_a: float, mu_b: float) -> float:
    """Average AoI as mean trapezoid area per refresh over ``E[Y]``."""
    cases = mm_two_step_table(mu_a, mu_b)
    area = sum(c.prob * (c.mean_service_times_interarrival + c.second_moment / 2) for c in cases)
    return area / mm_mean_interarrival(mu_a, mu_b)


def classify_refresh(
    prev_state: MmState | None,
    sensor: str,
    delivered_generation_time: float,
    other_generation_time: float,
) -> tuple[MmState, int | None]:
    """Classify a fresh delivery into the refresh-state chain.

    ``sensor`` is ``"A"`` or ``"B"``; ``other_generation_time`` is the
    generation time of the update the other sensor is serving at the moment
    of delivery. Returns the new state and the path index, or ``None`` for
    the path when there is no previous state yet.
    """
    if sensor not in ("A", "B"):
        raise ValueError(f"sensor must be 'A' or 'B', got {sensor!r}")
    fresh = other_generation_time > delivered_generation_time
    if sensor == "A":
        new_state = MmState.A0 if fresh else MmState.A1
    else:
        new_state = MmState.B0 if fresh else MmState.B1
    if prev_state is None:
        return new_state, None
    try:
        return new_state, PATH_OF[(MmState(prev_state), new_state)]
    except KeyError:
        raise ValueError(f"no path from {MmState(prev_state).name} to {new_state.name}") from None
