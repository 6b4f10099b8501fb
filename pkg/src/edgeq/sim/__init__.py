"""Seeded discrete-event simulation of the device/NIC/edge queueing network.

High-volume validation runs (``simulate_station``, ``simulate_on_device``,
``simulate_edge_offload``, ``simulate_split``) are computed with exact FCFS
recursions over pre-drawn arrays, which is the same sample path an
event-by-event simulation would produce, at a fraction of the cost.
Dynamic scenario scripts with mid-run events and a per-epoch policy hook
run on the event-driven engine in :mod:`edgeq.sim.dynamic`.
"""

from .distributions import ArrivalProcess, InterarrivalSpec
from .report import LittleCheck, SimReport, trace_to_csv
from .runs import (
    simulate_edge_offload,
    simulate_on_device,
    simulate_split,
    simulate_station,
)
from .station import AggregatedRate, DiscreteServers, StationConfig
from .dynamic import EpochRecord, PolicyContext, Timeline, fixed_policy, run_scenario_script, timeline_to_csv

__all__ = [
    "AggregatedRate",
    "ArrivalProcess",
    "DiscreteServers",
    "EpochRecord",
    "InterarrivalSpec",
    "LittleCheck",
    "PolicyContext",
    "SimReport",
    "StationConfig",
    "Timeline",
    "fixed_policy",
    "run_scenario_script",
    "simulate_edge_offload",
    "simulate_on_device",
    "simulate_split",
    "simulate_station",
    "timeline_to_csv",
    "trace_to_csv",
]
