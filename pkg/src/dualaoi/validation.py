"""Analytic-vs-simulation and table-validation checks.

Each ``check_*`` function runs one acceptance criterion end to end and
returns a :class:`CheckResult`; nothing here raises on a failed check. The
``validate`` CLI command and the acceptance tests both drive this module.
"""

from __future__ import annotations

import math
import random
import time
from collections import defaultdict
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from dualaoi import analytic as an
from dualaoi import markov as mk
from dualaoi.core import SystemSpec
from dualaoi.sim import SimConfig, conditional_md_oracle, run, simulate


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    time_limit: float | None = None

    @property
    def within_time(self) -> bool:
        return self.time_limit is None or self.seconds < self.time_limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        limit = f" (limit {self.time_limit:g}s)" if self.time_limit else ""
        return f"[{status}] {self.number:>2}. {self.name}: {self.detail} [{self.seconds:.2f}s{limit}]"


def _timed(number: int, name: str, limit: float | None, body: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = body()
    return CheckResult(number, name, passed, detail, time.perf_counter() - t0, limit)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# --- 1 ------------------------------------------------------------------


def check_point_values() -> CheckResult:
    def body():
        e = math.e
        mu = 1.0
        # the published forms, typed out again without any rearrangement
        md_avg_ref = (3 + 2 * mu + e * (-3 + (-1 + 2 * e) * mu)) / (mu * mu**2 * e ** (2 * mu))
        md_peak_ref = (2 + 2 * mu + e * (-2 + mu * (2 * e + mu))) / (mu * (1 + e * (1 + e) * mu))
        values = {
            "mm_avg_aoi": (an.mm_avg_aoi(1, 1), 5 / 4),
            "mm_peak_aoi": (an.mm_peak_aoi(1, 1), 4 / 3),
            "md_avg_aoi": (an.md_avg_aoi(1, 1), md_avg_ref),
            "md_peak_aoi": (an.md_peak_aoi(1, 1), md_peak_ref),
        }
        ok = all(abs(got - ref) <= 1e-9 for got, ref in values.values())
        ok &= abs(values["md_avg_aoi"][0] - 1.2052) <= 1e-3
        ok &= abs(values["md_peak_aoi"][0] - 1.4459) <= 1e-3
        ok &= abs((2 * e * e - 4 * e + 5) / e**2 - values["md_avg_aoi"][0]) <= 1e-9
        detail = ", ".join(f"{k}={v[0]:.6f}" for k, v in values.items())
        return ok, detail

    return _timed(1, "closed-form point values", 1.0, body)


# --- 2 ------------------------------------------------------------------


def check_reductions() -> CheckResult:
    def body():
        mu = 1.0
        r = {
            "mm_avg": an.reduction_vs_single_queue(an.mm_avg_aoi(mu, mu), mu),
            "mm_peak": an.reduction_vs_single_queue(an.mm_peak_aoi(mu, mu), mu),
            "md_avg": an.reduction_vs_single_queue(an.md_avg_aoi(mu, 1 / mu), mu),
            "md_peak": an.reduction_vs_single_queue(an.md_peak_aoi(mu, 1 / mu), mu),
        }
        ok = (
            abs(r["mm_avg"] - 37.5) < 1e-12
            and abs(r["mm_peak"] - 100 / 3) < 1e-12
            and abs(r["md_avg"] - 39.7) <= 0.1
            and abs(r["md_peak"] - 27.7) <= 0.1
        )
        return ok, ", ".join(f"{k}={v:.4f}%" for k, v in r.items())

    return _timed(2, "reduction vs single queue", 1.0, body)


# --- 3 ------------------------------------------------------------------


def check_graphical_equivalence(pairs: int = 100, seed: int = 3) -> CheckResult:
    def body():
        rng = random.Random(seed)
        worst_avg = worst_peak = 0.0
        for _ in range(pairs):
            a, b = rng.uniform(0.1, 10), rng.uniform(0.1, 10)
            worst_avg = max(worst_avg, abs(mk.mm_avg_aoi_graphical(a, b) - an.mm_avg_aoi(a, b)))
            worst_peak = max(worst_peak, abs(mk.mm_peak_aoi_markov(a, b) - an.mm_peak_aoi(a, b)))
        ok = worst_avg <= 1e-10 and worst_peak <= 1e-10
        return ok, f"max |graphical - closed| = {worst_avg:.2e}, max |E[T]+E[Y] - closed| = {worst_peak:.2e}"

    return _timed(3, "graphical-method equivalence", 1.0, body)


# --- 4 ------------------------------------------------------------------


def check_md_series() -> CheckResult:
    def body():
        worst = 0.0
        for m in (0.1, 0.5, 1, 2, 5):
            worst = max(
                worst,
                abs(an.md_avg_aoi_aggregate(1.0, m) - an.md_avg_aoi(1.0, m)),
                abs(an.md_avg_paoi_aggregate(1.0, m) - an.md_peak_aoi(1.0, m)),
            )
        return worst <= 1e-10, f"max |series - closed form| = {worst:.2e}"

    return _timed(4, "M-D series equivalence", 1.0, body)


# --- 5 ------------------------------------------------------------------


def check_sim_vs_analytic(accepted: int = 100_000, seed: int = 20240501) -> CheckResult:
    def body():
        worst = 0.0
        parts = []
        for i, mu in enumerate((2, 3, 4, 5)):
            for spec, avg, peak in (
                (SystemSpec.mm(mu, mu), an.mm_avg_aoi(mu, mu), an.mm_peak_aoi(mu, mu)),
                (SystemSpec.md(mu, 1 / mu), an.md_avg_aoi(mu, 1 / mu), an.md_peak_aoi(mu, 1 / mu)),
            ):
                s = simulate(spec, seed + i, accepted=accepted)
                e = max(_rel(s.avg_aoi, avg), _rel(s.avg_paoi, peak))
                worst = max(worst, e)
                parts.append(f"{spec.kind.value}@{mu}:{e:.2%}")
        return worst <= 0.02, f"max rel. error {worst:.3%} ({', '.join(parts)})"

    return _timed(5, "simulation vs closed forms (mu=2..5)", 30.0, body)


# --- 6 ------------------------------------------------------------------


def path_statistics_zscores(mu_a: float, mu_b: float, refreshes: int, seed: int) -> dict[int, dict[str, float]]:
    """Simulate the M-M system and z-score each path-table entry against its estimate."""
    cfg = SimConfig(SystemSpec.mm(mu_a, mu_b), seed, refreshes + 1_001, 1_000, emit_trace=True)
    trace = run(cfg).trace
    by_path: dict[int, list] = defaultdict(list)
    leaving: dict[str, int] = defaultdict(int)
    for rec in trace:
        if rec.path_l is None:
            continue
        by_path[rec.path_l].append((rec.Y, rec.T_service))
        leaving[rec.prev_state] += 1
    out = {}
    for row in mk.mm_path_table(mu_a, mu_b):
        data = np.array(by_path[row.path_index])
        n_l = len(data)
        n_from = leaving[row.from_state.name]
        y, t = data[:, 0], data[:, 1]
        p_hat = n_l / n_from
        se_p = math.sqrt(row.prob * (1 - row.prob) / n_from)
        out[row.path_index] = {
            "p": (p_hat - row.prob) / se_p,
            "E[T]": (t.mean() - row.mean_service) / (t.std(ddof=1) / math.sqrt(n_l)),
            "E[Y]": (y.mean() - row.mean_interarrival) / (y.std(ddof=1) / math.sqrt(n_l)),
            "E[Y^2]": ((y**2).mean() - row.second_moment_interarrival) / ((y**2).std(ddof=1) / math.sqrt(n_l)),
        }
    return out


def check_path_statistics(refreshes: int = 1_000_000, seed: int = 11) -> CheckResult:
    def body():
        worst = 0.0
        where = ""
        for rates in ((1, 1), (1, 2)):
            z = path_statistics_zscores(*rates, refreshes=refreshes, seed=seed)
            for l, stats in z.items():
                for name, value in stats.items():
                    if abs(value) > worst:
                        worst, where = abs(value), f"{rates} l={l} {name}"
        return worst <= 3.0, f"max |z| = {worst:.2f} at {where} over 80 entries"

    return _timed(6, "per-path statistics vs Monte Carlo", 60.0, body)


# --- 7 ------------------------------------------------------------------


def check_steady_state(pairs: int = 20, seed: int = 7) -> CheckResult:
    def body():
        rng = random.Random(seed)
        worst = 0.0
        for _ in range(pairs):
            a, b = rng.uniform(0.1, 10), rng.uniform(0.1, 10)
            diff = np.abs(mk.mm_steady_state_numeric(a, b) - np.array(mk.mm_steady_state(a, b)))
            worst = max(worst, float(diff.max()))
        unit = np.abs(mk.mm_steady_state_numeric(1, 1) - np.array([1 / 6, 1 / 3, 1 / 6, 1 / 3])).max()
        ok = worst <= 1e-12 and unit <= 1e-12
        return ok, f"max |numeric - closed| = {worst:.2e}; at (1,1) off by {unit:.1e}"

    return _timed(7, "steady-state distribution", None, body)


# --- 8 ------------------------------------------------------------------


def simplex_volume_numeric(t_rem: float, n: int) -> float:
    """Nested quadrature of ``1`` over ``{x_3..x_n >= 0, sum <= t_rem}``."""
    dims = n - 2
    if dims == 0:
        return 1.0

    def bound(*outer):
        return [0.0, t_rem - sum(outer)]

    # nquad orders ranges innermost first; the innermost bound depends on all outer variables
    ranges = [bound] * (dims - 1) + [[0.0, t_rem]]
    value, _ = integrate.nquad(lambda *x: 1.0, ranges, opts={"epsabs": 1e-13, "epsrel": 1e-12})
    return value


def check_simplex_volume() -> CheckResult:
    def body():
        worst = 0.0
        for n in (2, 3, 4, 5):
            for t in (0.25, 0.5, 1.0):
                worst = max(worst, _rel(an.lemma1_simplex(t, n), simplex_volume_numeric(t, n)))
        return worst <= 1e-6, f"max rel. error {worst:.2e}"

    return _timed(8, "simplex lemma vs quadrature", None, body)


# --- 9 ------------------------------------------------------------------


def check_conditional_tables(samples: int = 100_000, seed: int = 99) -> CheckResult:
    def body():
        worst = 0.0
        where = ""
        for k in range(4):
            for n in range(4):
                est = conditional_md_oracle(1.0, 1.0, k, n, samples=samples, seed=seed + 4 * k + n)
                ref = an.md_state_expectation(1.0, 1.0, k, n)
                for name, got, want in (("E[A]", est.peak_sum, ref.peak_sum), ("E[Q]", est.area, ref.area)):
                    e = _rel(got, want)
                    if e > worst:
                        worst, where = e, f"({k},{n}) {name}"
        return worst <= 0.02, f"max rel. error {worst:.3%} at {where}"

    return _timed(9, "conditional M-D tables vs Monte Carlo", 60.0, body)


# --- 10 -----------------------------------------------------------------


def md_peak_vs_ratio(ratios: np.ndarray, mu_a: float = 1.0) -> np.ndarray:
    return np.array([an.md_peak_aoi(mu_a, 1 / (r * mu_a)) for r in ratios])


def aoi_crossing_ratio(mu_a: float = 1.0) -> float:
    """Rate ratio mu_B/mu_A at which the M-M and M-D average AoI curves cross."""
    f = lambda r: an.mm_avg_aoi(mu_a, r * mu_a) - an.md_avg_aoi(mu_a, 1 / (r * mu_a))  # noqa: E731
    return optimize.brentq(f, 0.3, 1.0, xtol=1e-12)


def check_orderings(accepted: int = 100_000, seed: int = 4242) -> CheckResult:
    def body():
        notes = []
        ok = True
        # (a) M/M/2 at rho = 0.56 against the dual systems at equal total service rate
        mu = 1.0
        mm2 = simulate(SystemSpec.mm2(0.56 * 2 * mu, mu), seed, accepted=accepted)
        others = {
            "mm": simulate(SystemSpec.mm(mu, mu), seed, accepted=accepted),
            "md": simulate(SystemSpec.md(mu, 1 / mu), seed, accepted=accepted),
            "dd": simulate(SystemSpec.dd(1 / mu, 1 / mu), seed, accepted=accepted),
        }
        a_ok = all(
            mm2.avg_aoi - mm2.half_width_aoi > s.avg_aoi + s.half_width_aoi for s in others.values()
        )
        ok &= a_ok
        notes.append(
            f"(a) mm2 {mm2.avg_aoi:.3f} vs " + "/".join(f"{k} {s.avg_aoi:.3f}" for k, s in others.items())
        )

        # (b) unimodal M-D peak AoI over the rate ratio, interior maximum
        grid = np.linspace(0.01, 1.0, 199)
        curve = md_peak_vs_ratio(grid)
        i = int(np.argmax(curve))
        diffs = np.diff(curve)
        # for small ratios the curve is flat at 2/mu to machine precision
        unimodal = bool(np.all(diffs[:i] >= 0) and np.all(diffs[i:] <= 0))
        interior = curve[i] > curve[0] and curve[i] > curve[-1]
        r_lo, r_peak, r_hi = 0.02, float(grid[i]), 1.0
        sims = [
            simulate(SystemSpec.md(1.0, 1 / r), seed, accepted=2 * accepted) for r in (r_lo, r_peak, r_hi)
        ]
        top = sims[1]
        sim_ok = all(top.avg_paoi - top.half_width_paoi > s.avg_paoi + s.half_width_paoi for s in (sims[0], sims[2]))
        b_ok = unimodal and interior and sim_ok
        ok &= b_ok
        notes.append(
            f"(b) peak at ratio {r_peak:.3f} ({curve[i]:.4f}); simulated "
            + "/".join(f"{s.avg_paoi:.4f}" for s in sims)
        )

        # (c) crossing of the average-AoI curves
        cross = aoi_crossing_ratio()
        below = simulate(SystemSpec.mm(1.0, 0.5), seed, accepted=accepted), simulate(
            SystemSpec.md(1.0, 2.0), seed, accepted=accepted
        )
        c_ok = abs(cross - 0.8) <= 0.05 and below[0].avg_aoi < below[1].avg_aoi
        ok &= c_ok
        notes.append(f"(c) crossing at {cross:.4f}")

        # (d) effective rate and obsolete ratio at unit rates
        d_ok = True
        for k in ("mm", "md"):
            s = others[k]
            d_ok &= _rel(s.effective_arrival_rate, 1.5) <= 0.02 and abs(s.obsolete_ratio - 0.25) <= 0.01
        ok &= d_ok
        notes.append(
            "(d) "
            + ", ".join(
                f"{k} rate {others[k].effective_arrival_rate:.4f} obsolete {others[k].obsolete_ratio:.4f}"
                for k in ("mm", "md")
            )
        )
        return ok, "; ".join(notes)

    return _timed(10, "qualitative orderings", None, body)


# --- 11 -----------------------------------------------------------------


def check_preemptive(accepted: int = 100_000, seed: int = 555) -> CheckResult:
    def body():
        mu = 1.0
        avg_eq = an.mm11_preempt_avg_aoi(4 * mu, mu) == an.mm_avg_aoi(mu, mu)
        peak_gap = abs(an.mm11_preempt_peak_aoi(5.54 * mu, mu) - an.mm_peak_aoi(mu, mu))
        s4 = simulate(SystemSpec.mm11_preempt(4 * mu, mu), seed, accepted=accepted)
        s554 = simulate(SystemSpec.mm11_preempt(5.54 * mu, mu), seed + 1, accepted=accepted)
        e_avg = _rel(s4.avg_aoi, an.mm_avg_aoi(mu, mu))
        e_peak = _rel(s554.avg_paoi, an.mm_peak_aoi(mu, mu))
        ok = avg_eq and peak_gap <= 1e-3 and e_avg <= 0.02 and e_peak <= 0.02
        return ok, (
            f"avg equal: {avg_eq}, |peak gap| {peak_gap:.2e}; "
            f"simulated avg err {e_avg:.2%}, peak err {e_peak:.2%}"
        )

    return _timed(11, "preemptive M/M/1/1 equivalence", None, body)


FAST_CHECKS = (
    check_point_values,
    check_reductions,
    check_graphical_equivalence,
    check_md_series,
    check_steady_state,
    check_simplex_volume,
)
ALL_CHECKS = (
    check_point_values,
    check_reductions,
    check_graphical_equivalence,
    check_md_series,
    check_sim_vs_analytic,
    check_path_statistics,
    check_steady_state,
    check_simplex_volume,
    check_conditional_tables,
    check_orderings,
    check_preemptive,
)


def run_all(fast: bool = False) -> list[CheckResult]:
    return [check() for check in (FAST_CHECKS if fast else ALL_CHECKS)]
