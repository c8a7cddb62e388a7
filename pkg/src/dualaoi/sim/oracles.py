"""Independent recomputations used to cross-check the engine and the tables."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReplayResult:
    avg_aoi: float
    avg_paoi: float
    area: float
    peaks: list[float]


def replay_oracle(
    deliveries: Iterable[tuple[float, float]],
    horizon_end: float | None = None,
    start: float = 0.0,
    start_refresh: float | None = None,
) -> ReplayResult:
    """Rebuild AoI from a raw ``(time, generation_time)`` delivery log and integrate it.

    The freshest generation time ``u(t)`` is recomputed from scratch; the
    area over each constant-``u`` stretch ``[t0, t1]`` is
    ``(t1 - t0) * ((t0 + t1) / 2 - u)``. The horizon defaults to the last
    delivery time.
    """
    log = [(float(t), float(g)) for t, g in deliveries]
    times = [t for t, _ in log]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("deliveries must be sorted by time")
    if log and log[0][0] < start:
        raise ValueError("delivery before the start of the horizon")
    end = horizon_end if horizon_end is not None else (times[-1] if times else start)
    if times and end < times[-1]:
        raise ValueError("horizon ends before the last delivery")
    u = start if start_refresh is None else start_refresh
    pieces = []
    peaks = []
    t_prev = start
    for t, g in log:
        if g > t:
            raise ValueError(f"update generated at {g} after its delivery at {t}")
        pieces.append((t - t_prev) * ((t + t_prev) / 2 - u))
        t_prev = t
        if g > u:
            peaks.append(t - u)
            u = g
    pieces.append((end - t_prev) * ((end + t_prev) / 2 - u))
    area = math.fsum(pieces)
    span = end - start
    return ReplayResult(
        avg_aoi=area / span if span > 0 else math.nan,
        avg_paoi=math.fsum(peaks) / len(peaks) if peaks else math.nan,
        area=area,
        peaks=peaks,
    )


@dataclass(frozen=True)
class ConditionalEstimate:
    k: int
    n: int
    samples: int
    peak_count: float
    peak_sum: float
    peak_sum_se: float
    area: float
    area_se: float


def _ordered_uniforms(rng: np.random.Generator, samples: int, count: int, period: float) -> np.ndarray:
    return np.sort(rng.uniform(0.0, period, size=(samples, count)), axis=1)


def _poisson_by_rejection(
    rng: np.random.Generator, mu: float, period: float, k: int, n: int, samples: int
) -> tuple[np.ndarray, np.ndarray]:
    """Completion instants of sensor A in two periods, built from exponential gaps
    and kept only when the per-period counts are exactly ``(k, n)``."""
    need = k + n
    prev_keep, cur_keep = [], []
    got = 0
    width = need + 1
    while got < samples:
        batch = 200_000
        gaps = rng.exponential(1.0 / mu, size=(batch, width + 8))
        arr = np.cumsum(gaps, axis=1)
        # a realization is complete once it crosses 2T
        if not np.all(arr[:, -1] > 2 * period):
            arr = arr[arr[:, -1] > 2 * period]
        n_prev = np.sum(arr <= period, axis=1)
        n_tot = np.sum(arr <= 2 * period, axis=1)
        ok = (n_prev == k) & (n_tot - n_prev == n)
        sel = arr[ok]
        prev_keep.append(sel[:, :k])
        cur_keep.append(sel[:, k:need] - period)
        got += sel.shape[0]
    prev = np.concatenate(prev_keep)[:samples]
    cur = np.concatenate(cur_keep)[:samples]
    return prev, cur


def conditional_md_oracle(
    mu: float,
    period: float,
    k: int,
    n: int,
    samples: int = 100_000,
    seed: int = 0,
    method: str = "uniform",
) -> ConditionalEstimate:
    """Monte-Carlo estimate of the peak count, peak sum and AoI area inside one
    period of the deterministic sensor, given ``k`` sensor-A completions in the
    previous period and ``n`` in the current one.

    The previous period is ``(-T, 0]`` and the current one ``(0, T]``. Sensor
    B delivers at ``0`` (generated at ``-T``) and at ``T`` (generated at
    ``0``). Sensor A's update completing at a given instant was generated at
    its previous completion. The sawtooth over ``(0, T]`` is replayed
    exactly for every sample.

    ``method="uniform"`` places the conditioned completions as sorted
    uniforms; ``method="rejection"`` simulates the Poisson process and keeps
    the realizations with the right counts.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    if k < 0 or n < 0:
        raise ValueError("counts must be non-negative")
    T = float(period)
    rng = np.random.default_rng(seed)
    if method == "uniform":
        prev = _ordered_uniforms(rng, samples, k, T) - T
        cur = _ordered_uniforms(rng, samples, n, T)
    elif method == "rejection":
        prev, cur = _poisson_by_rejection(rng, mu, T, k, n, samples)
        prev = prev - T
    else:
        raise ValueError(f"unknown method {method!r}")

    # freshest generation time known at t = 0
    u = np.full(samples, -T)
    if k >= 2:
        u = np.maximum(u, prev[:, k - 2])

    # generation times of the deliveries inside (0, T]: n from A, then B at T
    if k >= 1:
        first_gen = prev[:, k - 1]
    else:
        first_gen = np.full(samples, -np.inf)  # started before the previous period
    gens = np.empty((samples, n + 1))
    times = np.empty((samples, n + 1))
    if n:
        gens[:, 0] = first_gen
        gens[:, 1:n] = cur[:, : n - 1]
        times[:, :n] = cur
    gens[:, n] = 0.0
    times[:, n] = T

    area = np.zeros(samples)
    psum = np.zeros(samples)
    pcount = np.zeros(samples)
    t_prev = np.zeros(samples)
    for j in range(n + 1):
        t, g = times[:, j], gens[:, j]
        area += (t - t_prev) * ((t + t_prev) / 2 - u)
        fresh = g > u
        psum += np.where(fresh, t - u, 0.0)
        pcount += fresh
        u = np.where(fresh, g, u)
        t_prev = t

    return ConditionalEstimate(
        k=k,
        n=n,
        samples=samples,
        peak_count=float(pcount.mean()),
        peak_sum=float(psum.mean()),
        peak_sum_se=float(psum.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.nan,
        area=float(area.mean()),
        area_se=float(area.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.nan,
    )
