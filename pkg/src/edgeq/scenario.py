"""Timestamped scenario scripts driving dynamic simulations.

A script starts from an initial deployment (device, workload, shared network
path, one or more edge servers with background tenants) and applies events
at their timestamps: bandwidth changes, device or tenant rate changes, and
tenants joining or leaving an edge.  Tenant slots keep their index for the
whole run; a removed tenant's slot stays allocated with zero rate, so later
events can address slots stably.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ScriptError
from .latency import DeviceSpec, EdgeServerState, NetworkPath, WorkloadSpec


@dataclass(frozen=True)
class SetBandwidth:
    t: float
    bandwidth: float


@dataclass(frozen=True)
class SetDeviceLambda:
    t: float
    lam: float


@dataclass(frozen=True)
class SetTenantLambda:
    t: float
    edge: int
    tenant: int
    lam: float


@dataclass(frozen=True)
class AddTenant:
    t: float
    edge: int
    lam: float
    s: float
    var: float = 0.0


@dataclass(frozen=True)
class RemoveTenant:
    t: float
    edge: int
    tenant: int


ScriptEvent = Union[SetBandwidth, SetDeviceLambda, SetTenantLambda, AddTenant, RemoveTenant]


@dataclass(frozen=True)
class Deployment:
    """Initial state of a scripted run."""

    dev: DeviceSpec
    w: WorkloadSpec
    net: NetworkPath
    edges: tuple[EdgeServerState, ...]

    def __post_init__(self):
        if not self.edges:
            raise ScriptError("a deployment needs at least one edge server")
        object.__setattr__(self, "edges", tuple(self.edges))


@dataclass(frozen=True)
class ScenarioScript:
    initial: Deployment
    events: tuple[ScriptEvent, ...] = ()
    horizon: float = 60.0
    seed: int = 0
    epoch_length: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.horizon > 0:
            raise ScriptError("horizon must be positive")
        if not self.epoch_length > 0:
            raise ScriptError("epoch length must be positive")
        last = 0.0
        for ev in self.events:
            if ev.t < 0:
                raise ScriptError(f"event at negative time {ev.t}")
            if ev.t < last:
                raise ScriptError("events must be sorted by timestamp")
            last = ev.t
        if self.events and self.horizon <= self.events[-1].t:
            raise ScriptError("horizon must exceed the last event time")
        self._validate_values()

    def _validate_values(self):
        tenant_counts = [len(e.tenants) for e in self.initial.edges]
        for ev in self.events:
            if isinstance(ev, SetBandwidth):
                if not ev.bandwidth > 0:
                    raise ScriptError(f"bandwidth must be positive at t={ev.t}")
                continue
            if isinstance(ev, SetDeviceLambda):
                if ev.lam < 0:
                    raise ScriptError(f"negative device rate at t={ev.t}")
                continue
            if not 0 <= ev.edge < len(self.initial.edges):
                raise ScriptError(f"edge index {ev.edge} out of range at t={ev.t}")
            if isinstance(ev, AddTenant):
                if ev.lam < 0 or ev.s < 0 or ev.var < 0:
                    raise ScriptError(f"negative tenant parameter at t={ev.t}")
                tenant_counts[ev.edge] += 1
                continue
            if not 0 <= ev.tenant < tenant_counts[ev.edge]:
                raise ScriptError(
                    f"tenant index {ev.tenant} out of range on edge {ev.edge} at t={ev.t}")
            if isinstance(ev, SetTenantLambda) and ev.lam < 0:
                raise ScriptError(f"negative tenant rate at t={ev.t}")
