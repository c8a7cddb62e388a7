"""Closed-form AoI / peak-AoI evaluators for the dual-sensor systems.

Two exponential sensors (M-M), an exponential sensor next to a
deterministic one (M-D), single-queue and preemptive M/M/1/1 baselines, and
the per-state tables behind the M-D results.

All functions take rates in 1/time and periods in time and return times (or
dimensionless ratios). Every metric is homogeneous of degree -1 in the
rates, so results at ``(s*mu, T/s)`` equal the results at ``(mu, T)``
divided by ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Double series over (k, n) are cut at this many terms at least.
MIN_SERIES_TERMS = 60
SERIES_TAIL_BOUND = 1e-12


def _positive(**kwargs: float) -> None:
    # Fractions pass through untouched so the M-M formulas can be checked exactly.
    for name, value in kwargs.items():
        if not value > 0 or (isinstance(value, float) and not math.isfinite(value)):
            raise ValueError(f"{name} must be positive and finite, got {value!r}")


# ---------------------------------------------------------------------------
# M-M system


def mm_peak_aoi(mu_a: float, mu_b: float) -> float:
    """Average peak AoI of two parallel always-busy exponential sensors."""
    _positive(mu_a=mu_a, mu_b=mu_b)
    return 2 * (mu_a + mu_b) / (mu_a * mu_a + mu_a * mu_b + mu_b * mu_b)


def mm_avg_aoi(mu_a: float, mu_b: float) -> float:
    """Time-average AoI of two parallel always-busy exponential sensors."""
    _positive(mu_a=mu_a, mu_b=mu_b)
    s = mu_a + mu_b
    return 2 * (mu_a * mu_a + 3 * mu_a * mu_b + mu_b * mu_b) / (s * s * s)


def mm_effective_rate(mu_a: float, mu_b: float) -> float:
    """Rate of non-obsolete deliveries at the monitor, ``1 / E[Y]``."""
    _positive(mu_a=mu_a, mu_b=mu_b)
    return (mu_a * mu_a + mu_a * mu_b + mu_b * mu_b) / (mu_a + mu_b)


def mm_obsolete_ratio(mu_a: float, mu_b: float) -> float:
    """Fraction of delivered updates discarded as obsolete.

    Each always-busy sensor completes updates at its service rate, so the
    total delivery rate is ``mu_a + mu_b``.
    """
    return 1 - mm_effective_rate(mu_a, mu_b) / (mu_a + mu_b)


# ---------------------------------------------------------------------------
# Single-queue baselines


def single_queue_avg_aoi(mu: float) -> float:
    """Zero-wait single exponential server: average AoI ``2 / mu``."""
    _positive(mu=mu)
    return 2 / mu


def single_queue_peak_aoi(mu: float) -> float:
    _positive(mu=mu)
    return 2 / mu


def mm11_preempt_avg_aoi(lam: float, mu: float) -> float:
    """M/M/1/1 with preemption in service (LCFS-P), Poisson generation ``lam``."""
    _positive(lam=lam, mu=mu)
    return 1 / lam + 1 / mu


def mm11_preempt_peak_aoi(lam: float, mu: float) -> float:
    _positive(lam=lam, mu=mu)
    return 1 / lam + 1 / mu + 1 / (lam + mu)


def mm11_preempt_effective_rate(lam: float, mu: float) -> float:
    """Deliveries per unit time; every delivery of LCFS-P is fresh."""
    _positive(lam=lam, mu=mu)
    return lam * mu / (lam + mu)


# ---------------------------------------------------------------------------
# M-D system: closed forms
#
# The textbook expressions carry e^{mu T} and e^{2 mu T}; they are evaluated
# here after dividing numerator and denominator by e^{2 mu T}, which keeps
# them finite for any mu*T. For small mu*T the average-AoI numerator and the
# obsolete ratio cancel to O(m^2) and O(m); they go through expm1 and
# _exp_tail instead.


def _exp_tail(m: float) -> float:
    """``e^{-m} - 1 + m`` without cancellation."""
    if m > 0.5:
        return math.expm1(-m) + m
    # alternating Taylor series from the m^2 term; 20 terms reach 1e-16 relative at m = 0.5
    term, total = m * m / 2, 0.0
    for j in range(3, 23):
        total += term
        term *= -m / j
    return total


def md_peak_aoi(mu: float, period: float) -> float:
    """Average peak AoI of an exponential sensor (rate ``mu``) in parallel with a
    deterministic one (service time ``period``)."""
    _positive(mu=mu, period=period)
    m = mu * period
    x = math.exp(-m)
    num = (2 + 2 * m) * x * x + (m * m - 2) * x + 2 * m
    den = mu * (x * x + m * x + m)
    return num / den


def md_avg_aoi(mu: float, period: float) -> float:
    """Time-average AoI of the M-D system."""
    _positive(mu=mu, period=period)
    m = mu * period
    y = math.expm1(-m)
    # (3 + 2m) x^2 - (3 + m) x + 2m with x = 1 + y
    num = 3 * _exp_tail(m) * (1 + y) + 2 * m * y * y
    return num / (m * mu)


def md_peak_count(mu: float, period: float) -> float:
    """Expected number of AoI peaks (fresh deliveries) per period of sensor B.

    Equals ``e^{-2mT} + mT e^{-mT} + mT``.
    """
    _positive(mu=mu, period=period)
    m = mu * period
    x = math.exp(-m)
    return x * x + m * x + m


def md_peak_sum(mu: float, period: float) -> float:
    """Expected sum of the AoI peaks that occur in one period of sensor B."""
    _positive(mu=mu, period=period)
    m = mu * period
    x = math.exp(-m)
    return ((2 + 2 * m) * x * x + (m * m - 2) * x + 2 * m) / mu


def md_effective_rate(mu: float, period: float) -> float:
    return md_peak_count(mu, period) / period


def md_obsolete_ratio(mu: float, period: float) -> float:
    """Per period, sensor A completes ``mu*T`` updates on average and B one."""
    _positive(mu=mu, period=period)
    m = mu * period
    y = math.expm1(-m)
    # 1 - (x^2 + m x + m) / (m + 1) with x = 1 + y
    return (-_exp_tail(m) - y * (1 + y + m)) / (m + 1)


# ---------------------------------------------------------------------------
# M-D system: per-state tables and series aggregation


@dataclass(frozen=True)
class MdStateExpectation:
    """Conditional expectations for one period of sensor B in state ``(k, n)``.

    ``k`` and ``n`` count sensor-A completions in the previous and in the
    current period. ``peak_count`` and ``peak_sum`` refer to fresh
    deliveries inside the current period; ``area`` is the integral of the
    AoI over it.
    """

    k: int
    n: int
    peak_count: float
    peak_sum: float
    area: float


def md_state_probability(mu: float, period: float, k: int, n: int) -> float:
    """Probability of ``k`` then ``n`` sensor-A completions in two consecutive periods."""
    if k < 0 or n < 0:
        raise ValueError("counts must be non-negative")
    m = mu * period
    if m <= 0:
        raise ValueError("mu * period must be positive")
    if m <= 30 and k <= 150 and n <= 150:
        return (m**k / math.factorial(k)) * (m**n / math.factorial(n)) * math.exp(-2 * m)
    logm = math.log(m)
    return math.exp((k + n) * logm - 2 * m - math.lgamma(k + 1) - math.lgamma(n + 1))


def md_state_expectation(mu: float, period: float, k: int, n: int) -> MdStateExpectation:
    if k < 0 or n < 0:
        raise ValueError("counts must be non-negative")
    _positive(mu=mu, period=period)
    T = period
    if k == 0:
        if n <= 1:
            count, psum = 1, 2 * T
        else:
            count, psum = n - 1, (3 * n - 1) * T / (1 + n)
        area = 1.5 * T * T if n == 0 else (4 * n + 5) * T * T / ((1 + n) * (2 + n))
    else:
        if n == 0:
            count, psum = 1, (3 + k) * T / (1 + k)
            area = (5 + k) * T * T / (2 * (1 + k))
        else:
            if n == 1:
                count, psum = 2, (9 + 3 * k) * T / (2 * (1 + k))
            else:
                count, psum = n, (2 * n * k + 5 * n - k + 2) * T / ((1 + k) * (1 + n))
            area = (2 * n * k + 5 * n + k + 7) * T * T / ((1 + k) * (1 + n) * (2 + n))
    return MdStateExpectation(k=k, n=n, peak_count=float(count), peak_sum=psum, area=area)


def md_series_terms(mu: float, period: float) -> int:
    """Truncation order for the (k, n) double series."""
    return max(MIN_SERIES_TERMS, math.ceil(10 * mu * period))


def _poisson_weights(m: float, terms: int) -> list[float]:
    w = []
    logm = math.log(m)
    for j in range(terms + 1):
        w.append(math.exp(j * logm - m - math.lgamma(j + 1)))
    tail = 1 - math.fsum(w)
    if tail > SERIES_TAIL_BOUND:
        raise ArithmeticError(f"Poisson({m}) tail {tail:.3g} beyond {terms} terms exceeds bound")
    return w


def md_series(mu: float, period: float) -> tuple[float, float, float]:
    """Return ``(E[N], E[A], E[Q])`` per period by summing the state tables."""
    _positive(mu=mu, period=period)
    terms = md_series_terms(mu, period)
    w = _poisson_weights(mu * period, terms)
    count, psum, area = [], [], []
    for k, wk in enumerate(w):
        for n, wn in enumerate(w):
            p = wk * wn
            if p == 0.0:
                continue
            e = md_state_expectation(mu, period, k, n)
            count.append(p * e.peak_count)
            psum.append(p * e.peak_sum)
            area.append(p * e.area)
    return math.fsum(count), math.fsum(psum), math.fsum(area)


def md_avg_paoi_aggregate(mu: float, period: float) -> float:
    """Average peak AoI as expected peak sum over expected peak count per period."""
    count, psum, _ = md_series(mu, period)
    return psum / count


def md_avg_aoi_aggregate(mu: float, period: float) -> float:
    """Average AoI as the probability-weighted mean area per period over ``T``."""
    _, _, area = md_series(mu, period)
    return area / period


def lemma1_simplex(t_rem: float, n: int) -> float:
    """Volume of ``{x_3..x_n >= 0 : x_3 + ... + x_n <= t_rem}``, i.e. ``t_rem^(n-2)/(n-2)!``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if t_rem < 0:
        raise ValueError("t_rem must be non-negative")
    return t_rem ** (n - 2) / math.factorial(n - 2)


def reduction_vs_single_queue(value: float, mu: float) -> float:
    """Relative reduction (in percent) against the ``2/mu`` single-queue figure."""
    return (1 - value / single_queue_avg_aoi(mu)) * 100
