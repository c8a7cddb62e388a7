"""Discrete-event simulation and independent oracles."""

from dualaoi.sim.engine import (
    EventKind,
    EventQueue,
    SimConfig,
    SimRun,
    TransitionRecord,
    run,
    simulate,
    trace_to_csv,
)
from dualaoi.sim.oracles import ConditionalEstimate, ReplayResult, conditional_md_oracle, replay_oracle

__all__ = [
    "ConditionalEstimate",
    "EventKind",
    "EventQueue",
    "ReplayResult",
    "SimConfig",
    "SimRun",
    "TransitionRecord",
    "conditional_md_oracle",
    "replay_oracle",
    "run",
    "simulate",
    "trace_to_csv",
]
