"""Command-line front end: ``dualaoi analytic|simulate|sweep|validate``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dualaoi import analytic as an
from dualaoi.core import RANDOMIZED, SystemKind, SystemSpec
from dualaoi.sim import SimConfig, run, trace_to_csv
from dualaoi.sim.batch import batch_half_width
from dualaoi.sim.engine import DEFAULT_ACCEPTED, DEFAULT_BATCHES, DEFAULT_WARMUP

SEED_ENV = "DUALAOI_SEED"
MM2_LOAD = 0.56
MM11_FACTOR = 4.0
METRICS = ("avg_aoi", "avg_paoi", "effective_rate", "obsolete_ratio")
SWEEP_COLUMNS = ("system", "param", "metric", "analytic", "simulated", "ci_half_width", "seed")


class NoClosedForm(ValueError):
    pass


def fmt(x: float | None) -> str:
    """12 significant digits, locale independent; empty for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.12g}"


def _round(x):
    if isinstance(x, float):
        return float(f"{x:.12g}") if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# closed forms per system


def analytic_metrics(spec: SystemSpec) -> dict[str, float]:
    """Every closed-form metric available for ``spec``.

    Raises :class:`NoClosedForm` for M/M/2 and D-D.
    """
    kind = spec.kind
    if kind is SystemKind.MM:
        a, b = spec.sensor_a.rate, spec.sensor_b.rate
        return {
            "avg_aoi": an.mm_avg_aoi(a, b),
            "avg_paoi": an.mm_peak_aoi(a, b),
            "effective_rate": an.mm_effective_rate(a, b),
            "obsolete_ratio": an.mm_obsolete_ratio(a, b),
        }
    if kind is SystemKind.MD:
        mu, T = spec.sensor_a.rate, spec.sensor_b.period
        return {
            "avg_aoi": an.md_avg_aoi(mu, T),
            "avg_paoi": an.md_peak_aoi(mu, T),
            "effective_rate": an.md_effective_rate(mu, T),
            "obsolete_ratio": an.md_obsolete_ratio(mu, T),
        }
    if kind is SystemKind.MM11_PREEMPT:
        lam, mu = spec.arrival_rate, spec.sensor_a.rate
        return {
            "avg_aoi": an.mm11_preempt_avg_aoi(lam, mu),
            "avg_paoi": an.mm11_preempt_peak_aoi(lam, mu),
            "effective_rate": an.mm11_preempt_effective_rate(lam, mu),
            "obsolete_ratio": 0.0,
        }
    raise NoClosedForm(f"no closed form for system {kind.value}; use simulate")


def single_queue_metrics(mu: float) -> dict[str, float]:
    return {
        "avg_aoi": an.single_queue_avg_aoi(mu),
        "avg_paoi": an.single_queue_peak_aoi(mu),
        "effective_rate": mu,
        "obsolete_ratio": 0.0,
    }


def _stat_for(metric: str, stats) -> tuple[float, float | None]:
    if metric == "avg_aoi":
        return stats.avg_aoi, stats.half_width_aoi
    if metric == "avg_paoi":
        return stats.avg_paoi, stats.half_width_paoi
    if metric == "effective_rate":
        return stats.effective_arrival_rate, None
    return stats.obsolete_ratio, None


# ---------------------------------------------------------------------------
# argument plumbing


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise ValueError(f"--{name.replace('_', '-')} is required for system {args.system}")
    return value


def spec_from_args(args) -> SystemSpec:
    system = args.system
    try:
        if system == "mm":
            return SystemSpec.mm(_need(args, "mu_a"), _need(args, "mu_b"))
        if system == "md":
            mu = args.mu if args.mu is not None else _need(args, "mu_a")
            return SystemSpec.md(mu, _need(args, "period"))
        if system == "dd":
            offset = args.offset if args.offset is not None else RANDOMIZED
            if offset != RANDOMIZED:
                offset = float(offset)
            return SystemSpec.dd(_need(args, "period_a"), _need(args, "period_b"), offset)
        if system == "mm2":
            return SystemSpec.mm2(_need(args, "lam"), _need(args, "mu"))
        if system == "mm11":
            return SystemSpec.mm11_preempt(_need(args, "lam"), _need(args, "mu"))
    except ValueError as exc:
        raise ValueError(f"invalid parameters: {exc}") from None
    raise ValueError(f"unknown system {system!r}")


def _add_system_args(p: argparse.ArgumentParser, systems: tuple[str, ...]) -> None:
    p.add_argument("--system", required=True, choices=systems)
    p.add_argument("--mu-a", type=float, help="rate of sensor A")
    p.add_argument("--mu-b", type=float, help="rate of sensor B (M-M)")
    p.add_argument("--mu", type=float, help="rate of the exponential sensor / each server")
    p.add_argument("--period", type=float, help="service time of the deterministic sensor (M-D)")
    p.add_argument("--period-a", type=float, help="D-D sensor A period")
    p.add_argument("--period-b", type=float, help="D-D sensor B period")
    p.add_argument("--offset", help="D-D start delay of sensor B, or 'randomized'")
    p.add_argument("--lam", type=float, help="Poisson generation rate (mm2, mm11)")


def resolve_seed(flag: int | None) -> int:
    """``--seed`` wins, then ``$DUALAOI_SEED``; simulation refuses to run without one."""
    if flag is not None:
        seed = flag
    else:
        raw = os.environ.get(SEED_ENV, "").strip()
        if not raw:
            raise ValueError(f"seed is required: pass --seed or set {SEED_ENV}")
        try:
            seed = int(raw)
        except ValueError:
            raise ValueError(f"seed: {SEED_ENV}={raw!r} is not an integer") from None
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment. Keys may use - or _."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualaoi", description=__doc__)
    parser.add_argument("--config", help="key = value file with defaults for any option")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="evaluate closed forms")
    _add_system_args(p, ("mm", "md", "dd", "mm2", "mm11", "single"))
    for m in METRICS:
        p.add_argument(f"--{m.replace('_', '-')}", dest=f"want_{m}", action="store_true")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.add_argument("--output", help="write to this file instead of stdout")

    p = sub.add_parser("simulate", help="run one simulation, print JSON")
    _add_system_args(p, ("mm", "md", "dd", "mm2", "mm11"))
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV})")
    p.add_argument("--accepted", type=int, default=DEFAULT_ACCEPTED, help="measured accepted deliveries")
    p.add_argument("--warmup", type=int, default=DEFAULT_WARMUP, help="accepted deliveries discarded first")
    p.add_argument("--batches", type=int, default=DEFAULT_BATCHES)
    p.add_argument("--trace", help="write the per-delivery trace CSV here")
    p.add_argument("--output", help="write JSON here instead of stdout")

    p = sub.add_parser("sweep", help="sweep a parameter, write CSV")
    p.add_argument("--systems", default="mm,md", help="comma-separated subset of mm,md,dd,mm2,mm11")
    p.add_argument("--variable", choices=("service_rate", "rate_ratio", "period"), default="service_rate")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--metrics", default=",".join(METRICS))
    p.add_argument("--mode", choices=("analytic", "simulate", "both"), default="analytic")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV})")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--accepted", type=int, default=DEFAULT_ACCEPTED)
    p.add_argument("--warmup", type=int, default=DEFAULT_WARMUP)
    p.add_argument("--batches", type=int, default=DEFAULT_BATCHES)
    p.add_argument("--base-mu", type=float, default=1.0, help="sensor-A rate for ratio and period sweeps")
    p.add_argument("--mm2-load", type=float, default=MM2_LOAD, help="M/M/2 load lambda/(mu_A+mu_B)")
    p.add_argument("--mm11-factor", type=float, default=MM11_FACTOR, help="M/M/1/1 lambda as a multiple of mu_A")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", "-o", help="CSV path (default stdout)")

    p = sub.add_parser("validate", help="run the analytic-vs-simulation and table checks")
    p.add_argument("--fast", action="store_true", help="skip the simulation-heavy checks")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config_file(known.config)
    for action in parser._subparsers._group_actions:  # noqa: SLF001 - argparse has no public accessor
        for sp in action.choices.values():
            dests = {a.dest: a for a in sp._actions}  # noqa: SLF001
            defaults = {}
            for key, raw in values.items():
                a = dests.get(key)
                if a is None:
                    continue
                if a.const is True:  # store_true flags
                    defaults[key] = raw.lower() in ("1", "true", "yes", "on")
                else:
                    try:
                        defaults[key] = a.type(raw) if a.type else raw
                    except ValueError:
                        raise ValueError(f"{known.config}: bad value for {key}: {raw!r}") from None
                    if a.choices is not None and defaults[key] not in a.choices:
                        raise ValueError(f"{known.config}: {key} must be one of {', '.join(map(str, a.choices))}")
                # a value from the file satisfies a required option; the flag still overrides it
                a.required = False
            sp.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# commands


def _emit(text: str, output: str | None) -> None:
    if output:
        try:
            Path(output).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {output}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def cmd_analytic(args) -> int:
    if args.system == "single":
        values = single_queue_metrics(_need(args, "mu"))
    else:
        spec = spec_from_args(args)
        values = analytic_metrics(spec)
    wanted = [m for m in METRICS if getattr(args, f"want_{m}")] or list(METRICS)
    values = {m: values[m] for m in wanted}
    if args.json:
        text = json.dumps(_round(values), sort_keys=True) + "\n"
    else:
        text = "".join(f"{m} {fmt(v)}\n" for m, v in values.items())
    _emit(text, args.output)
    return 0


def cmd_simulate(args) -> int:
    spec = spec_from_args(args)
    seed = resolve_seed(args.seed)
    if args.accepted < 1:
        raise ValueError("invalid parameters: accepted must be >= 1")
    try:
        config = SimConfig(
            spec,
            seed,
            target_accepted=args.accepted + args.warmup,
            warmup_accepted=args.warmup,
            batch_count=args.batches,
            emit_trace=bool(args.trace),
        )
    except ValueError as exc:
        raise ValueError(f"invalid parameters: {exc}") from None
    result = run(config)
    doc = {
        "config": {
            **spec.describe(),
            "seed": seed,
            "accepted": args.accepted,
            "warmup": args.warmup,
            "batch_count": args.batches,
        },
        "stats": result.stats.as_dict(),
    }
    if result.dd_offset is not None:
        doc["config"]["dd_offset_used"] = result.dd_offset
    try:
        ref = analytic_metrics(spec)
    except NoClosedForm:
        ref = None
    if ref is not None:
        stats = result.stats
        sim_values = {m: _stat_for(m, stats)[0] for m in METRICS}
        doc["reference"] = ref
        doc["relative_error"] = {
            m: abs(sim_values[m] - ref[m]) / abs(ref[m]) if ref[m] != 0 else None for m in METRICS
        }
    if args.trace:
        try:
            with open(args.trace, "w", newline="") as fh:
                trace_to_csv(result.trace, fh)
        except OSError as exc:
            raise OSError(f"cannot write {args.trace}: {exc.strerror}") from None
    _emit(json.dumps(_round(doc), sort_keys=True, indent=2) + "\n", args.output)
    return 0


@dataclass(frozen=True)
class _Point:
    index: int
    system: str
    param: float
    spec: SystemSpec


def sweep_spec(system: str, variable: str, x: float, base_mu: float, mm2_load: float, mm11_factor: float) -> SystemSpec:
    """Scenario at sweep value ``x``.

    ``service_rate``: both sensors at rate ``x``. ``rate_ratio``: sensor A at
    ``base_mu``, sensor B at ``x * base_mu``. ``period``: sensor A at
    ``base_mu``, sensor B with mean service time ``x``. Deterministic sensors
    use the reciprocal rate as period; M/M/2 uses two identical servers at
    the mean of the two rates and ``lambda = load * (mu_A + mu_B)``.
    """
    if variable == "service_rate":
        mu_a, mu_b = x, x
    elif variable == "rate_ratio":
        mu_a, mu_b = base_mu, x * base_mu
    elif variable == "period":
        mu_a, mu_b = base_mu, 1 / x
    else:
        raise ValueError(f"unknown sweep variable {variable!r}")
    if system == "mm":
        return SystemSpec.mm(mu_a, mu_b)
    if system == "md":
        return SystemSpec.md(mu_a, 1 / mu_b)
    if system == "dd":
        return SystemSpec.dd(1 / mu_a, 1 / mu_b)
    if system == "mm2":
        return SystemSpec.mm2(mm2_load * (mu_a + mu_b), (mu_a + mu_b) / 2)
    if system == "mm11":
        return SystemSpec.mm11_preempt(mm11_factor * mu_a, mu_a)
    raise ValueError(f"unknown system {system!r}")


def _simulate_point(task):
    spec, seeds, accepted, warmup, batches = task
    return [run(SimConfig(spec, s, accepted + warmup, warmup, batches)).stats for s in seeds]


def cmd_sweep(args) -> int:
    systems = [s.strip() for s in args.systems.split(",") if s.strip()]
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    for m in metrics:
        if m not in METRICS:
            raise ValueError(f"unknown metric {m!r}; choose from {', '.join(METRICS)}")
    if not args.start < args.stop:
        raise ValueError("sweep range needs start < stop")
    if args.steps < 2:
        raise ValueError("sweep needs at least 2 steps")
    if args.start <= 0:
        raise ValueError("sweep values must be positive")
    if args.replications < 1:
        raise ValueError("replications must be >= 1")
    simulate_mode = args.mode in ("simulate", "both")
    seed = resolve_seed(args.seed) if simulate_mode else None

    grid = np.linspace(args.start, args.stop, args.steps)
    points = [
        _Point(i, system, float(x), sweep_spec(system, args.variable, float(x), args.base_mu, args.mm2_load, args.mm11_factor))
        for system in systems
        for i, x in enumerate(grid)
    ]

    sims = [None] * len(points)
    if simulate_mode:
        seeds = [seed + r for r in range(args.replications)]
        tasks = [(p.spec, seeds, args.accepted, args.warmup, args.batches) for p in points]
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                sims = list(pool.map(_simulate_point, tasks))
        else:
            sims = [_simulate_point(t) for t in tasks]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for point, reps in zip(points, sims):
        try:
            ref = analytic_metrics(point.spec) if args.mode != "simulate" else None
        except NoClosedForm:
            ref = None
        for m in metrics:
            sim_value = half = None
            if reps:
                vals = [_stat_for(m, s) for s in reps]
                sim_value = float(np.mean([v for v, _ in vals]))
                if len(vals) > 1:
                    half = batch_half_width([v for v, _ in vals])
                else:
                    half = vals[0][1]
            writer.writerow(
                [
                    point.system,
                    fmt(point.param),
                    m,
                    fmt(ref[m]) if ref else "",
                    fmt(sim_value),
                    fmt(half),
                    seed if simulate_mode else "",
                ]
            )
    _emit(buf.getvalue(), args.output)
    if args.output:
        # the CSV schema is fixed, so the full configuration goes next to it
        meta = {
            "systems": systems,
            "variable": args.variable,
            "start": args.start,
            "stop": args.stop,
            "steps": args.steps,
            "metrics": metrics,
            "mode": args.mode,
            "seed": seed,
            "replications": args.replications,
            "accepted": args.accepted,
            "warmup": args.warmup,
            "batch_count": args.batches,
            "base_mu": args.base_mu,
            "mm2_load": args.mm2_load,
            "mm11_factor": args.mm11_factor,
        }
        _emit(json.dumps(_round(meta), sort_keys=True, indent=2) + "\n", sweep_meta_path(args.output))
    return 0


def sweep_meta_path(csv_path: str) -> str:
    return str(csv_path) + ".meta.json"


def cmd_validate(args) -> int:
    from dualaoi import validation

    results = []
    for check in validation.FAST_CHECKS if args.fast else validation.ALL_CHECKS:
        r = check()
        print(r.line(), flush=True)
        results.append(r)
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError) as exc:
        print(f"dualaoi: error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NoClosedForm as exc:
        print(f"dualaoi: error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"dualaoi: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
