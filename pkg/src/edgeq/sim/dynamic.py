"""Event-driven simulation of scripted, dynamic scenarios.

Runs the device/NIC/edge network request by request so that mid-run events
(bandwidth shifts, tenant churn) and a per-epoch policy hook can reroute
traffic while in-flight requests keep their original path.  Request volumes
here are epoch-scale, so the event loop favors clarity over throughput; the
high-volume validation runs live in :mod:`edgeq.sim.runs`.
"""

from __future__ import annotations

import heapq
import io
import csv
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..errors import UnstableError
from ..latency import (
    DeviceSpec,
    EdgeServerState,
    NetworkPath,
    Tenant,
    WorkloadKind,
    WorkloadSpec,
    predict_edge_offload,
    predict_on_device,
)
from ..scenario import (
    AddTenant,
    RemoveTenant,
    ScenarioScript,
    SetBandwidth,
    SetDeviceLambda,
    SetTenantLambda,
)
from .distributions import service_draw_one
from .station import DEFAULT_QUEUE_BOUND
from .streams import StreamFactory

_PRIO_SCRIPT = 0
_PRIO_EPOCH = 1
_PRIO_SIM = 2


@dataclass(frozen=True)
class EpochRecord:
    """One manager epoch: chosen strategy, observation, per-strategy predictions."""

    t: float
    strategy: int | None
    observed_mean_s: float
    predicted_s: tuple[float, ...]

    @property
    def strategy_label(self) -> str:
        return "on_device" if self.strategy is None else f"edge{self.strategy}"


@dataclass
class Timeline:
    records: list[EpochRecord]
    epoch_length: float
    n_edges: int
    device_arrivals: int = 0
    device_completions: int = 0
    in_flight: int = 0

    @property
    def switch_times(self) -> list[float]:
        times = []
        for prev, cur in zip(self.records, self.records[1:]):
            if cur.strategy != prev.strategy:
                times.append(cur.t)
        return times

    def phases(self) -> list[tuple[float, int | None]]:
        """(start time, strategy) of each constant-strategy phase."""
        out = []
        for rec in self.records:
            if not out or out[-1][1] != rec.strategy:
                out.append((rec.t, rec.strategy))
        return out


def timeline_to_csv(timeline: Timeline) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["epoch_s", "strategy", "observed_ms", "pred_device_ms"]
    header += [f"pred_edge_E{i}_ms" for i in range(timeline.n_edges)]
    writer.writerow(header)
    for rec in timeline.records:
        row = [format(rec.t, ".12g"), rec.strategy_label]
        obs = rec.observed_mean_s
        row.append("" if math.isnan(obs) else format(obs * 1e3, ".12g"))
        for value in rec.predicted_s:
            row.append("inf" if math.isinf(value) else format(value * 1e3, ".12g"))
        writer.writerow(row)
    return out.getvalue()


@dataclass
class PolicyContext:
    """Snapshot handed to the policy hook at each epoch boundary."""

    now: float
    w: WorkloadSpec
    k_dev: float
    true_device_rate: float
    true_bandwidth: float
    edges_true: tuple[EdgeServerState, ...]
    device_arrivals: tuple[float, ...]
    edge_completions: tuple[tuple[tuple[float, bool], ...], ...]

    @property
    def n_edges(self) -> int:
        return len(self.edges_true)


Policy = Callable[[PolicyContext], "object"]


def fixed_policy(strategy: int | None) -> Policy:
    """Policy that always picks the same strategy."""

    def _policy(ctx: PolicyContext):
        return strategy

    return _policy


def _true_predictions(ctx: PolicyContext) -> tuple[float, ...]:
    dev = DeviceSpec(ctx.true_device_rate, ctx.k_dev)
    net = NetworkPath(ctx.true_bandwidth)
    try:
        t_dev = predict_on_device(dev, ctx.w)
    except UnstableError:
        t_dev = math.inf
    preds = [t_dev]
    for edge in ctx.edges_true:
        try:
            preds.append(predict_edge_offload(dev, edge, net, ctx.w))
        except UnstableError:
            preds.append(math.inf)
    return tuple(preds)


class _Source:
    """One Poisson request source with a mutable rate."""

    def __init__(self, name: str, rate: float, rng):
        self.name = name
        self.rate = rate
        self.rng = rng
        self.version = 0


class _Station:
    """Single FCFS serving slot with parallelism folding.

    The slot is held for ``service / k``; the request finishes processing
    (and moves on) after its full service time.
    """

    def __init__(self, name: str, k: float, draw: Callable[[object], float],
                 queue_bound: float):
        self.name = name
        self.k = k
        self.draw = draw
        self.queue: deque = deque()
        self.busy = False
        self.queue_bound = queue_bound

    def arrive(self, engine: "_Engine", job: "_Job", t: float) -> None:
        if self.busy:
            self.queue.append((job, t))
            if len(self.queue) > self.queue_bound:
                raise UnstableError(stage=self.name)
        else:
            self._start(engine, job, t)

    def _start(self, engine: "_Engine", job: "_Job", t: float) -> None:
        self.busy = True
        s = self.draw(job)
        engine.schedule(t + s / self.k, _PRIO_SIM, "free", self)
        engine.schedule(t + s, _PRIO_SIM, "done", (self, job))

    def release(self, engine: "_Engine", t: float) -> None:
        self.busy = False
        if self.queue:
            job, _ = self.queue.popleft()
            self._start(engine, job, t)


class _Job:
    __slots__ = ("origin", "gen_t", "route", "stage")

    def __init__(self, origin: int | None, gen_t: float, route: list):
        self.origin = origin  # None = device request, else edge index of the tenant
        self.gen_t = gen_t
        self.route = route
        self.stage = 0


class _Engine:
    def __init__(self, script: ScenarioScript, policy: Policy, min_horizon: float,
                 queue_bound: float, telemetry_window: float):
        self.script = script
        self.policy = policy
        self.horizon = max(script.horizon, min_horizon or 0.0)
        self.queue_bound = queue_bound
        self.telemetry_window = telemetry_window
        self.factory = StreamFactory(script.seed)
        self.heap: list = []
        self.seq = 0

        init = script.initial
        self.w = init.w
        self.k_dev = init.dev.k
        self.bandwidth = init.net.bandwidth
        self.device_rate = init.dev.lam
        self.n_edges = len(init.edges)
        self.edge_k = [e.k for e in init.edges]
        # Tenant slots: (rate, s, var); removed slots keep index with rate 0.
        self.tenant_slots: list[list[list[float]]] = [
            [[t.lam, t.s, t.var] for t in e.tenants] for e in init.edges]

        self.device_source = _Source("device", self.device_rate,
                                     self.factory.stream("arrivals/device"))
        self.tenant_sources: list[list[_Source]] = [
            [_Source(f"edge{e}/tenant{i}", slot[0],
                     self.factory.stream(f"arrivals/edge{e}/tenant{i}"))
             for i, slot in enumerate(slots)]
            for e, slots in enumerate(self.tenant_slots)]

        self.device_proc = _Station("device_proc", self.k_dev,
                                    self._draw_device_proc, queue_bound)
        self.device_nic = _Station("request NIC", 1.0, self._draw_request_nic,
                                   queue_bound)
        self.edge_procs = [
            _Station(f"edge{e} processor", self.edge_k[e],
                     self._make_edge_draw(e), queue_bound)
            for e in range(self.n_edges)]
        self.edge_nics = [
            _Station(f"edge{e} response NIC", 1.0, self._draw_response_nic,
                     queue_bound)
            for e in range(self.n_edges)]

        self.strategy: int | None = None
        self.records: list[dict] = []
        self.obs_sum: list[float] = []
        self.obs_n: list[int] = []
        self.device_arrival_log: deque = deque()
        self.edge_completion_log: list[deque] = [deque() for _ in range(self.n_edges)]
        self.n_generated = 0
        self.n_completed = 0

    # --- service draws -------------------------------------------------
    def _draw_device_proc(self, job: "_Job") -> float:
        s = self.w.s_dev if job.route_kind == "local" else job.partial_s
        return s  # overridden below for split support; kept simple here

    def _draw_request_nic(self, job: "_Job") -> float:
        mean = self.w.d_req / self.bandwidth
        return self.factory.stream("service/request_nic").exponential(mean)

    def _draw_response_nic(self, job: "_Job") -> float:
        mean = self.w.d_res / self.bandwidth
        return self.factory.stream("service/response_nic").exponential(mean)

    def _make_edge_draw(self, e: int):
        def _draw(job: "_Job") -> float:
            if job.origin is None:
                if self.w.kind is WorkloadKind.VARIABLE:
                    return self.factory.stream(f"service/edge{e}/dev").exponential(self.w.s_edge)
                return self.w.s_edge
            slot = self.tenant_slots[e][job.origin]
            rng = self.factory.stream(f"service/edge{e}/tenant{job.origin}")
            return service_draw_one(rng, slot[1], slot[2])
        return _draw

    # --- scheduling -----------------------------------------------------
    def schedule(self, t: float, prio: int, kind: str, payload) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (t, prio, self.seq, kind, payload))

    def _schedule_next_arrival(self, source: _Source, edge: int | None, t: float) -> None:
        if source.rate <= 0:
            return
        gap = source.rng.exponential(1.0 / source.rate)
        self.schedule(t + gap, _PRIO_SIM, "arrival",
                      (source, edge, source.version))

    # --- run ------------------------------------------------------------
    def run(self) -> Timeline:
        for ev in self.script.events:
            self.schedule(ev.t, _PRIO_SCRIPT, "script", ev)
        n_epochs = math.ceil(self.horizon / self.script.epoch_length)
        for i in range(n_epochs):
            self.schedule(i * self.script.epoch_length, _PRIO_EPOCH, "epoch", i)
        self.obs_sum = [0.0] * n_epochs
        self.obs_n = [0] * n_epochs
        self._schedule_next_arrival(self.device_source, None, 0.0)
        for e, sources in enumerate(self.tenant_sources):
            for src in sources:
                self._schedule_next_arrival(src, e, 0.0)

        while self.heap:
            t, prio, _, kind, payload = heapq.heappop(self.heap)
            if t > self.horizon:
                break
            if kind == "script":
                self._apply_script_event(payload, t)
            elif kind == "epoch":
                self._on_epoch(payload, t)
            elif kind == "arrival":
                self._on_arrival(payload, t)
            elif kind == "free":
                payload.release(self, t)
            elif kind == "done":
                station, job = payload
                self._on_done(station, job, t)

        records = []
        for i, rec in enumerate(self.records):
            n = self.obs_n[i] if i < len(self.obs_n) else 0
            mean = self.obs_sum[i] / n if n else math.nan
            records.append(EpochRecord(rec["t"], rec["strategy"], mean,
                                       rec["predicted"]))
        return Timeline(records, self.script.epoch_length, self.n_edges,
                        device_arrivals=self.n_generated,
                        device_completions=self.n_completed,
                        in_flight=self.n_generated - self.n_completed)

    # --- event handlers --------------------------------------------------
    def _apply_script_event(self, ev, t: float) -> None:
        if isinstance(ev, SetBandwidth):
            self.bandwidth = ev.bandwidth
        elif isinstance(ev, SetDeviceLambda):
            self.device_rate = ev.lam
            src = self.device_source
            src.rate = ev.lam
            src.version += 1
            self._schedule_next_arrival(src, None, t)
        elif isinstance(ev, SetTenantLambda):
            self.tenant_slots[ev.edge][ev.tenant][0] = ev.lam
            src = self.tenant_sources[ev.edge][ev.tenant]
            src.rate = ev.lam
            src.version += 1
            self._schedule_next_arrival(src, ev.edge, t)
        elif isinstance(ev, AddTenant):
            e = ev.edge
            i = len(self.tenant_slots[e])
            self.tenant_slots[e].append([ev.lam, ev.s, ev.var])
            src = _Source(f"edge{e}/tenant{i}", ev.lam,
                          self.factory.stream(f"arrivals/edge{e}/tenant{i}"))
            self.tenant_sources[e].append(src)
            self._schedule_next_arrival(src, e, t)
        elif isinstance(ev, RemoveTenant):
            self.tenant_slots[ev.edge][ev.tenant][0] = 0.0
            src = self.tenant_sources[ev.edge][ev.tenant]
            src.rate = 0.0
            src.version += 1

    def _current_edge_states(self) -> tuple[EdgeServerState, ...]:
        return tuple(
            EdgeServerState(self.edge_k[e],
                            tuple(Tenant(*slot) for slot in self.tenant_slots[e]
                                  if slot[0] > 0))
            for e in range(self.n_edges))

    def _prune_logs(self, now: float) -> None:
        keep_from = now - self.telemetry_window
        while self.device_arrival_log and self.device_arrival_log[0] < keep_from:
            self.device_arrival_log.popleft()
        for log in self.edge_completion_log:
            while log and log[0][0] < keep_from:
                log.popleft()

    def _on_epoch(self, index: int, t: float) -> None:
        self._prune_logs(t)
        ctx = PolicyContext(
            now=t,
            w=self.w,
            k_dev=self.k_dev,
            true_device_rate=self.device_rate,
            true_bandwidth=self.bandwidth,
            edges_true=self._current_edge_states(),
            device_arrivals=tuple(self.device_arrival_log),
            edge_completions=tuple(tuple(log) for log in self.edge_completion_log),
        )
        choice = self.policy(ctx)
        if hasattr(choice, "edge_index"):
            strategy = choice.edge_index
            predicted = tuple(choice.predicted_s)
        else:
            strategy = choice
            predicted = _true_predictions(ctx)
        if strategy is not None and not 0 <= strategy < self.n_edges:
            raise ValueError(f"policy chose nonexistent edge {strategy}")
        self.strategy = strategy
        self.records.append({"t": t, "strategy": strategy, "predicted": predicted})

    def _route_for(self, strategy: int | None) -> list[_Station]:
        if strategy is None:
            return [self.device_proc]
        route: list[_Station] = []
        if self.w.d_req > 0:
            route.append(self.device_nic)
        route.append(self.edge_procs[strategy])
        if self.w.d_res > 0:
            route.append(self.edge_nics[strategy])
        return route

    def _on_arrival(self, payload, t: float) -> None:
        source, edge, version = payload
        if version != source.version:
            return  # superseded by a rate change
        self._schedule_next_arrival(source, edge, t)
        if edge is None:
            self.n_generated += 1
            self.device_arrival_log.append(t)
            job = _Job(None, t, self._route_for(self.strategy))
            job.route_edge = self.strategy
        else:
            slot_index = self.tenant_sources[edge].index(source)
            route: list[_Station] = [self.edge_procs[edge]]
            if self.w.d_res > 0:
                route.append(self.edge_nics[edge])
            job = _Job(slot_index, t, route)
            job.route_edge = edge
        job.route[0].arrive(self, job, t)

    def _on_done(self, station: _Station, job: _Job, t: float) -> None:
        if station in self.edge_procs:
            e = self.edge_procs.index(station)
            self.edge_completion_log[e].append((t, job.origin is not None))
        job.stage += 1
        if job.stage < len(job.route):
            job.route[job.stage].arrive(self, job, t)
            return
        if job.origin is None:
            self.n_completed += 1
            epoch = int(t / self.script.epoch_length)
            if epoch < len(self.obs_sum):
                self.obs_sum[epoch] += t - job.gen_t
                self.obs_n[epoch] += 1


def run_scenario_script(script: ScenarioScript, policy: Policy | None = None,
                        min_horizon: float = 0.0, *,
                        queue_bound: float = DEFAULT_QUEUE_BOUND,
                        telemetry_window: float = 30.0) -> Timeline:
    """Simulate a scripted scenario, consulting ``policy`` at each epoch.

    The policy may return an edge index, None for on-device processing, or a
    decision object carrying ``edge_index`` and ``predicted_s``; requests
    generated during an epoch follow the strategy chosen at its start.
    """
    engine = _Engine(script, policy or fixed_policy(None), min_horizon,
                     queue_bound, telemetry_window)
    return engine.run()
