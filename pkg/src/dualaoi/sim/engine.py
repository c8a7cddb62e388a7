"""Seeded discrete-event simulation of the five system kinds.

The dual-sensor systems (M-M, M-D, D-D) need no event list: each sensor is
always busy, so the next event is simply the earlier of the two pending
completions. The preemptive M/M/1/1 likewise only ever has two pending
clocks. M/M/2 runs on a small heap-based event queue.
"""

from __future__ import annotations

import csv
import enum
import heapq
import io
import itertools
import math
from collections import deque
from dataclasses import dataclass, field

from dualaoi.core import (
    RANDOMIZED,
    AoiPath,
    Delivery,
    RandomStream,
    ServiceKind,
    SimStats,
    SystemKind,
    SystemSpec,
    sample_service,
)
from dualaoi.markov import MmState, classify_refresh
from dualaoi.sim.batch import batch_half_width

STREAM_A = "sensor_a"
STREAM_B = "sensor_b"
STREAM_ARRIVALS = "arrivals"
STREAM_OFFSET = "dd_offset"

DEFAULT_WARMUP = 1_000
DEFAULT_ACCEPTED = 100_000
DEFAULT_BATCHES = 32


@dataclass(frozen=True)
class SimConfig:
    """One simulation run.

    ``target_accepted`` counts every accepted delivery, warm-up included,
    so ``target_accepted - warmup_accepted`` deliveries are measured.
    """

    spec: SystemSpec
    seed: int
    target_accepted: int = DEFAULT_ACCEPTED + DEFAULT_WARMUP
    warmup_accepted: int = DEFAULT_WARMUP
    batch_count: int = DEFAULT_BATCHES
    emit_trace: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.spec, SystemSpec):
            raise TypeError("spec must be a SystemSpec")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.warmup_accepted < 0:
            raise ValueError(f"warmup_accepted must be >= 0, got {self.warmup_accepted}")
        if self.target_accepted <= self.warmup_accepted:
            raise ValueError(
                f"target_accepted ({self.target_accepted}) must exceed warmup_accepted ({self.warmup_accepted})"
            )
        if self.batch_count < 1:
            raise ValueError(f"batch_count must be >= 1, got {self.batch_count}")
        if self.batch_count > self.target_accepted - self.warmup_accepted:
            raise ValueError("batch_count exceeds the number of measured deliveries")

    @property
    def measured(self) -> int:
        return self.target_accepted - self.warmup_accepted


class EventKind(enum.IntEnum):
    # value is the tie-break order for simultaneous events
    COMPLETION_A = 0
    COMPLETION_B = 1
    ARRIVAL = 2


@dataclass(frozen=True, order=True)
class Event:
    time: float
    kind: EventKind
    seq: int
    payload: float | int | None = field(default=None, compare=False)


class EventQueue:
    """Min-heap of events ordered by (time, kind, insertion sequence)."""

    def __init__(self) -> None:
        self._heap: list[Event] = []
        self._seq = itertools.count()

    def push(self, time: float, kind: EventKind, payload=None) -> Event:
        ev = Event(time, kind, next(self._seq), payload)
        heapq.heappush(self._heap, ev)
        return ev

    def pop(self) -> Event:
        if not self._heap:
            raise RuntimeError("event queue ran empty; the model should never reach this state")
        return heapq.heappop(self._heap)

    def __len__(self) -> int:
        return len(self._heap)


@dataclass(frozen=True)
class TransitionRecord:
    """One accepted delivery. State fields are ``None`` outside the dual systems."""

    t: float
    gen_time: float
    sensor: str
    prev_state: str | None
    new_state: str | None
    path_l: int | None
    Y: float | None
    T_service: float


TRACE_COLUMNS = ("t", "gen_time", "sensor", "prev_state", "new_state", "path_l", "Y", "T_service")


def trace_to_csv(trace: list[TransitionRecord], stream: io.TextIOBase | None = None) -> str:
    buf = stream if stream is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in trace:
        writer.writerow(
            [
                repr(r.t),
                repr(r.gen_time),
                r.sensor,
                r.prev_state or "",
                r.new_state or "",
                "" if r.path_l is None else r.path_l,
                "" if r.Y is None else repr(r.Y),
                repr(r.T_service),
            ]
        )
    return buf.getvalue() if stream is None else ""


@dataclass
class SimRun:
    stats: SimStats
    # measurement window, for replaying the trace independently
    start_time: float
    start_refresh_timestamp: float
    end_time: float
    trace: list[TransitionRecord] | None = None
    dd_offset: float | None = None


class _Monitor:
    """Wraps the AoI path with warm-up, batching and trace bookkeeping."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.path = AoiPath.starting_at(0.0)
        self.total_accepted = 0
        self.measuring = config.warmup_accepted == 0
        self.start_time = 0.0
        self.start_refresh = 0.0
        self.batch_size = config.measured // config.batch_count
        self.batch_marks: list[tuple[float, float]] = []  # (area, elapsed) at batch ends
        self.trace: list[TransitionRecord] | None = [] if config.emit_trace else None
        self.state: MmState | None = None
        self.last_refresh_time: float | None = None

    @property
    def done(self) -> bool:
        return self.total_accepted >= self.config.target_accepted

    def deliver(self, gen: float, t: float, sensor: str, other_gen: float | None) -> None:
        path = self.path
        result = path.deliver(gen, t)
        if result is Delivery.OBSOLETE:
            return
        self.total_accepted += 1
        if self.trace is not None:
            self._record(gen, t, sensor, other_gen)
        if not self.measuring:
            if self.total_accepted == self.config.warmup_accepted:
                path.reset_statistics()
                self.measuring = True
                self.start_time = t
                self.start_refresh = path.last_refresh_timestamp
            return
        m = path.deliveries_accepted
        if m % self.batch_size == 0 and len(self.batch_marks) < self.config.batch_count - 1:
            self.batch_marks.append((path.integrated_area, path.elapsed))

    def _record(self, gen: float, t: float, sensor: str, other_gen: float | None) -> None:
        prev = self.state
        if other_gen is not None:
            new_state, path_l = classify_refresh(prev, sensor, gen, other_gen)
            self.state = new_state
        else:
            new_state, path_l = None, None
        y = None if self.last_refresh_time is None else t - self.last_refresh_time
        self.last_refresh_time = t
        if not self.measuring:
            return
        self.trace.append(
            TransitionRecord(
                t=t,
                gen_time=gen,
                sensor=sensor,
                prev_state=None if prev is None or new_state is None else prev.name,
                new_state=None if new_state is None else new_state.name,
                path_l=path_l,
                Y=y,
                T_service=t - gen,
            )
        )

    def result(self, dd_offset: float | None = None) -> SimRun:
        path = self.path
        marks = self.batch_marks + [(path.integrated_area, path.elapsed)]
        aoi_batches = []
        prev_area = prev_time = 0.0
        for area, elapsed in marks:
            aoi_batches.append((area - prev_area) / (elapsed - prev_time))
            prev_area, prev_time = area, elapsed
        peaks = path.peaks
        bs = self.batch_size
        nb = self.config.batch_count
        paoi_batches = [
            math.fsum(peaks[i * bs : (i + 1) * bs if i < nb - 1 else len(peaks)])
            / len(peaks[i * bs : (i + 1) * bs if i < nb - 1 else len(peaks)])
            for i in range(nb)
        ]
        n_acc = path.deliveries_accepted
        n_obs = path.deliveries_obsolete
        stats = SimStats(
            avg_aoi=path.average_age,
            avg_paoi=path.average_peak,
            effective_arrival_rate=n_acc / path.elapsed,
            obsolete_ratio=n_obs / (n_acc + n_obs),
            n_accepted=n_acc,
            n_obsolete=n_obs,
            sim_time=path.elapsed,
            half_width_aoi=batch_half_width(aoi_batches),
            half_width_paoi=batch_half_width(paoi_batches),
        )
        return SimRun(
            stats=stats,
            start_time=self.start_time,
            start_refresh_timestamp=self.start_refresh,
            end_time=path.clock,
            trace=self.trace,
            dd_offset=dd_offset,
        )


def _run_dual(config: SimConfig) -> SimRun:
    spec = config.spec
    law_a, law_b = spec.sensor_a, spec.sensor_b
    stream_a = RandomStream(config.seed, STREAM_A)
    stream_b = RandomStream(config.seed, STREAM_B)
    monitor = _Monitor(config)

    offset = None
    if spec.kind is SystemKind.DD:
        if spec.dd_offset == RANDOMIZED:
            offset = RandomStream(config.seed, STREAM_OFFSET).uniform(0.0, law_b.period)
        else:
            offset = float(spec.dd_offset)
    start_b = offset or 0.0

    # generation time of the update in service == its service start
    gen_a, next_a = 0.0, sample_service(law_a, stream_a)
    gen_b, next_b = start_b, start_b + sample_service(law_b, stream_b)

    exp_a = law_a.kind is ServiceKind.EXPONENTIAL
    exp_b = law_b.kind is ServiceKind.EXPONENTIAL
    rate_a, rate_b = law_a.rate, law_b.rate
    per_a, per_b = law_a.period, law_b.period
    deliver = monitor.deliver
    while not monitor.done:
        if next_a <= next_b:
            t = next_a
            g = gen_a
            gen_a = t
            next_a = t + (stream_a.exponential(rate_a) if exp_a else per_a)
            deliver(g, t, "A", gen_b)
        else:
            t = next_b
            g = gen_b
            gen_b = t
            next_b = t + (stream_b.exponential(rate_b) if exp_b else per_b)
            deliver(g, t, "B", gen_a)
    return monitor.result(dd_offset=offset)


def _run_mm2(config: SimConfig) -> SimRun:
    spec = config.spec
    mu = spec.sensor_a.rate
    lam = spec.arrival_rate
    servers = (RandomStream(config.seed, STREAM_A), RandomStream(config.seed, STREAM_B))
    kinds = (EventKind.COMPLETION_A, EventKind.COMPLETION_B)
    arrivals = RandomStream(config.seed, STREAM_ARRIVALS)
    monitor = _Monitor(config)
    events = EventQueue()
    waiting: deque[float] = deque()
    in_service: list[float | None] = [None, None]

    events.push(arrivals.exponential(lam), EventKind.ARRIVAL)
    while not monitor.done:
        ev = events.pop()
        t = ev.time
        if ev.kind is EventKind.ARRIVAL:
            events.push(t + arrivals.exponential(lam), EventKind.ARRIVAL)
            for i in (0, 1):
                if in_service[i] is None:
                    in_service[i] = t
                    events.push(t + servers[i].exponential(mu), kinds[i])
                    break
            else:
                waiting.append(t)
        else:
            i = int(ev.kind)
            gen = in_service[i]
            if waiting:
                in_service[i] = waiting.popleft()
                events.push(t + servers[i].exponential(mu), kinds[i])
            else:
                in_service[i] = None
            monitor.deliver(gen, t, f"S{i + 1}", None)
    return monitor.result()


def _run_mm11_preempt(config: SimConfig) -> SimRun:
    # Two clocks suffice: the next arrival and the completion of the packet in
    # service, if any. A completion wins a tie with an arrival.
    spec = config.spec
    mu = spec.sensor_a.rate
    lam = spec.arrival_rate
    service = RandomStream(config.seed, STREAM_A)
    arrivals = RandomStream(config.seed, STREAM_ARRIVALS)
    monitor = _Monitor(config)
    next_arrival = arrivals.exponential(lam)
    completion = math.inf
    current = 0.0  # generation time of the packet in service
    while not monitor.done:
        if completion <= next_arrival:
            t = completion
            completion = math.inf
            monitor.deliver(current, t, "S1", None)
        else:
            t = next_arrival
            next_arrival = t + arrivals.exponential(lam)
            current = t  # preempts whatever was in service
            completion = t + service.exponential(mu)
    return monitor.result()


def run(config: SimConfig) -> SimRun:
    """Simulate ``config`` and return statistics over the post-warm-up window."""
    kind = config.spec.kind
    if kind in (SystemKind.MM, SystemKind.MD, SystemKind.DD):
        return _run_dual(config)
    if kind is SystemKind.MM2:
        return _run_mm2(config)
    if kind is SystemKind.MM11_PREEMPT:
        return _run_mm11_preempt(config)
    raise ValueError(f"unsupported system kind {kind!r}")  # pragma: no cover


def simulate(
    spec: SystemSpec,
    seed: int,
    accepted: int = DEFAULT_ACCEPTED,
    warmup: int = DEFAULT_WARMUP,
    batch_count: int = DEFAULT_BATCHES,
) -> SimStats:
    """Shorthand: measure ``accepted`` deliveries after ``warmup``."""
    return run(SimConfig(spec, seed, accepted + warmup, warmup, batch_count)).stats
