"""Shared domain types: service laws, scenarios, the AoI sample-path accumulator
and named random streams."""

from __future__ import annotations

import enum
import math
import zlib
from dataclasses import dataclass, field

import numpy as np


class ServiceKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class ServiceModel:
    """Service-time law of one sensor (or server).

    Use the :meth:`exponential` / :meth:`deterministic` constructors rather
    than filling the fields by hand.
    """

    kind: ServiceKind
    rate: float | None = None
    period: float | None = None

    def __post_init__(self) -> None:
        if self.kind is ServiceKind.EXPONENTIAL:
            if self.rate is None or not (math.isfinite(self.rate) and self.rate > 0):
                raise ValueError(f"exponential service needs a finite rate > 0, got {self.rate!r}")
        elif self.kind is ServiceKind.DETERMINISTIC:
            if self.period is None or not (math.isfinite(self.period) and self.period > 0):
                raise ValueError(f"deterministic service needs a finite period > 0, got {self.period!r}")
        else:  # pragma: no cover - enum exhausts the cases
            raise ValueError(f"unknown service kind {self.kind!r}")

    @classmethod
    def exponential(cls, rate: float) -> ServiceModel:
        return cls(ServiceKind.EXPONENTIAL, rate=float(rate))

    @classmethod
    def deterministic(cls, period: float) -> ServiceModel:
        return cls(ServiceKind.DETERMINISTIC, period=float(period))

    @property
    def mean(self) -> float:
        if self.kind is ServiceKind.EXPONENTIAL:
            return 1.0 / self.rate
        return self.period

    @property
    def throughput(self) -> float:
        """Completions per unit time when the sensor is always busy."""
        return 1.0 / self.mean


class SystemKind(str, enum.Enum):
    MM = "mm"
    MD = "md"
    DD = "dd"
    MM2 = "mm2"
    MM11_PREEMPT = "mm11"


RANDOMIZED = "randomized"


@dataclass(frozen=True)
class SystemSpec:
    """A full scenario: which system and its parameters.

    ``sensor_b`` is ``None`` for the single-stream systems (M/M/2 and the
    preemptive M/M/1/1), which instead carry ``arrival_rate``. For M/M/2,
    ``sensor_a`` is the law of each of the two identical servers.
    ``dd_offset`` is the start delay of sensor B in the D-D system, either a
    number in ``[0, period_b)`` or ``"randomized"``.
    """

    kind: SystemKind
    sensor_a: ServiceModel
    sensor_b: ServiceModel | None = None
    arrival_rate: float | None = None
    dd_offset: float | str = 0.0

    def __post_init__(self) -> None:
        kind = SystemKind(self.kind)
        object.__setattr__(self, "kind", kind)
        exp_, det = ServiceKind.EXPONENTIAL, ServiceKind.DETERMINISTIC
        expected = {
            SystemKind.MM: (exp_, exp_),
            SystemKind.MD: (exp_, det),
            SystemKind.DD: (det, det),
        }
        if kind in expected:
            if self.sensor_b is None:
                raise ValueError(f"sensor_b is required for system {kind.value}")
            want_a, want_b = expected[kind]
            if self.sensor_a.kind is not want_a or self.sensor_b.kind is not want_b:
                raise ValueError(
                    f"system {kind.value} needs sensor_a {want_a.value} and sensor_b {want_b.value}"
                )
            if self.arrival_rate is not None:
                raise ValueError(f"arrival_rate is not used by system {kind.value}")
        else:
            if self.sensor_b is not None:
                raise ValueError(f"sensor_b must be absent for system {kind.value}")
            if self.sensor_a.kind is not exp_:
                raise ValueError(f"system {kind.value} needs exponential servers")
            if self.arrival_rate is None or not (
                math.isfinite(self.arrival_rate) and self.arrival_rate > 0
            ):
                raise ValueError(f"arrival_rate must be a finite positive number, got {self.arrival_rate!r}")
        if kind is SystemKind.DD:
            if self.dd_offset != RANDOMIZED:
                off = float(self.dd_offset)
                if not (0.0 <= off < self.sensor_b.period):
                    raise ValueError(
                        f"dd_offset must lie in [0, {self.sensor_b.period}), got {self.dd_offset!r}"
                    )

    @classmethod
    def mm(cls, mu_a: float, mu_b: float) -> SystemSpec:
        return cls(SystemKind.MM, ServiceModel.exponential(mu_a), ServiceModel.exponential(mu_b))

    @classmethod
    def md(cls, mu: float, period: float) -> SystemSpec:
        return cls(SystemKind.MD, ServiceModel.exponential(mu), ServiceModel.deterministic(period))

    @classmethod
    def dd(cls, period_a: float, period_b: float, offset: float | str = RANDOMIZED) -> SystemSpec:
        return cls(
            SystemKind.DD,
            ServiceModel.deterministic(period_a),
            ServiceModel.deterministic(period_b),
            dd_offset=offset,
        )

    @classmethod
    def mm2(cls, arrival_rate: float, mu: float) -> SystemSpec:
        return cls(SystemKind.MM2, ServiceModel.exponential(mu), arrival_rate=float(arrival_rate))

    @classmethod
    def mm11_preempt(cls, arrival_rate: float, mu: float) -> SystemSpec:
        return cls(SystemKind.MM11_PREEMPT, ServiceModel.exponential(mu), arrival_rate=float(arrival_rate))

    @property
    def is_dual(self) -> bool:
        return self.kind in (SystemKind.MM, SystemKind.MD, SystemKind.DD)

    def describe(self) -> dict:
        """Flat, JSON-friendly view of the scenario."""
        out: dict = {"system": self.kind.value}
        for name, model in (("a", self.sensor_a), ("b", self.sensor_b)):
            if model is None:
                continue
            if model.kind is ServiceKind.EXPONENTIAL:
                out[f"mu_{name}"] = model.rate
            else:
                out[f"period_{name}"] = model.period
        if self.arrival_rate is not None:
            out["arrival_rate"] = self.arrival_rate
        if self.kind is SystemKind.DD:
            out["dd_offset"] = self.dd_offset
        return out


class RandomStream:
    """A named, reproducible stream of variates derived from a master seed.

    Draws are served from a pre-generated block of standard variates, so the
    sequence seen by a sensor depends only on ``(seed, name)`` and not on the
    rate it is scaled by. This is what makes common-random-numbers comparisons
    between system kinds work.
    """

    def __init__(self, seed: int, name: str, block: int = 8192):
        self.seed = int(seed)
        self.name = name
        key = zlib.crc32(name.encode("utf-8"))
        self._rng = np.random.default_rng(np.random.SeedSequence(self.seed & (2**64 - 1), spawn_key=(key,)))
        self._block = block
        self._exp: list[float] = []
        self._exp_pos = 0

    def standard_exponential(self) -> float:
        if self._exp_pos >= len(self._exp):
            self._exp = self._rng.standard_exponential(self._block).tolist()
            self._exp_pos = 0
        x = self._exp[self._exp_pos]
        self._exp_pos += 1
        return x

    def exponential(self, rate: float) -> float:
        return self.standard_exponential() / rate

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        return float(self._rng.uniform(low, high))


def sample_service(model: ServiceModel, stream: RandomStream) -> float:
    if model.kind is ServiceKind.DETERMINISTIC:
        return model.period
    return stream.exponential(model.rate)


class Delivery(str, enum.Enum):
    ACCEPTED = "accepted"
    OBSOLETE = "obsolete"


@dataclass
class AoiPath:
    """Piecewise-linear AoI sample path with exact (trapezoid) integration.

    ``clock`` is the absolute time the path has been advanced to. The age at
    that instant is ``current_age == clock - last_refresh_timestamp``.
    """

    clock: float = 0.0
    last_refresh_timestamp: float = 0.0
    current_age: float = 0.0
    integrated_area: float = 0.0
    elapsed: float = 0.0
    peaks: list[float] = field(default_factory=list)
    deliveries_accepted: int = 0
    deliveries_obsolete: int = 0

    @classmethod
    def starting_at(cls, clock: float, last_refresh_timestamp: float | None = None) -> AoiPath:
        ref = clock if last_refresh_timestamp is None else last_refresh_timestamp
        if ref > clock:
            raise ValueError("last refresh cannot lie in the future")
        return cls(clock=clock, last_refresh_timestamp=ref, current_age=clock - ref)

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise ValueError(f"cannot advance by negative dt={dt}")
        age = self.current_age
        self.integrated_area += age * dt + 0.5 * dt * dt
        self.current_age = age + dt
        self.elapsed += dt
        self.clock += dt

    def advance_to(self, now: float) -> None:
        self.advance(now - self.clock)

    def deliver(self, generation_time: float, now: float) -> Delivery:
        """Offer an update generated at ``generation_time`` to the monitor at ``now``.

        The path is first advanced to ``now``. Updates no newer than the
        freshest one already delivered (ties included) are obsolete.
        """
        if generation_time > now:
            raise ValueError(f"update generated at {generation_time} delivered earlier, at {now}")
        if now != self.clock:
            self.advance_to(now)
        if generation_time > self.last_refresh_timestamp:
            self.peaks.append(now - self.last_refresh_timestamp)
            self.last_refresh_timestamp = generation_time
            self.current_age = now - generation_time
            self.deliveries_accepted += 1
            return Delivery.ACCEPTED
        self.deliveries_obsolete += 1
        return Delivery.OBSOLETE

    def reset_statistics(self) -> None:
        """Drop accumulated statistics but keep the current age (end of warm-up)."""
        self.integrated_area = 0.0
        self.elapsed = 0.0
        self.peaks = []
        self.deliveries_accepted = 0
        self.deliveries_obsolete = 0

    @property
    def average_age(self) -> float:
        return self.integrated_area / self.elapsed if self.elapsed > 0 else math.nan

    @property
    def average_peak(self) -> float:
        return math.fsum(self.peaks) / len(self.peaks) if self.peaks else math.nan


@dataclass(frozen=True)
class SimStats:
    avg_aoi: float
    avg_paoi: float
    effective_arrival_rate: float
    obsolete_ratio: float
    n_accepted: int
    n_obsolete: int
    sim_time: float
    half_width_aoi: float
    half_width_paoi: float

    def as_dict(self) -> dict:
        return {
            "avg_aoi": self.avg_aoi,
            "avg_paoi": self.avg_paoi,
            "effective_arrival_rate": self.effective_arrival_rate,
            "obsolete_ratio": self.obsolete_ratio,
            "n_accepted": self.n_accepted,
            "n_obsolete": self.n_obsolete,
            "sim_time": self.sim_time,
            "half_width_aoi": self.half_width_aoi,
            "half_width_paoi": self.half_width_paoi,
        }
