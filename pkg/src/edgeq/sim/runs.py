"""High-volume seeded simulations of the station and tandem models.

These produce the exact sample paths of an event-by-event FCFS simulation
by chaining per-station recursions over pre-drawn arrays: a station's
departures (sorted) are the next station's arrivals, with background tenant
streams superposed at the edge processor and all responses sharing the edge
NIC.  Per-stream draws come from named counter-based generators, so results
are bit-reproducible for a given seed.
"""

from __future__ import annotations

import math

import numpy as np

from ..latency import (
    DeviceSpec,
    EdgeServerState,
    NetworkPath,
    SplitPoint,
    WorkloadKind,
    WorkloadSpec,
)
from ..queueing import ServiceDistribution
from .distributions import ArrivalProcess, service_draws
from .report import SimReport, TraceData, batch_mean_ci, little_check
from .station import (
    AggregatedRate,
    DEFAULT_QUEUE_BOUND,
    ServerMode,
    StationConfig,
    station_pass,
)

DEFAULT_WARMUP_FRAC = 0.1


def _total_jobs(min_completions: int, warmup_frac: float) -> tuple[int, int]:
    if min_completions < 1:
        raise ValueError("min_completions must be >= 1")
    if not 0.0 <= warmup_frac < 1.0:
        raise ValueError("warmup fraction must be in [0, 1)")
    n_total = math.ceil(min_completions / (1.0 - warmup_frac))
    return n_total, n_total - min_completions


def _classify(mean: float, var: float) -> ServiceDistribution:
    if var == 0.0:
        return ServiceDistribution.deterministic(mean)
    if var == mean * mean:
        return ServiceDistribution.exponential(mean)
    return ServiceDistribution.general(mean, var)


def _workload_service(mean: float, kind: WorkloadKind) -> ServiceDistribution:
    if kind is WorkloadKind.VARIABLE:
        return ServiceDistribution.exponential(mean)
    return ServiceDistribution.deterministic(mean)


def simulate_station(arrivals: ArrivalProcess, station: StationConfig,
                     min_completions: int, *, warmup_frac: float = DEFAULT_WARMUP_FRAC,
                     queue_bound: float = DEFAULT_QUEUE_BOUND,
                     collect_trace: bool = False) -> SimReport:
    """Single-station run; the empirical wait validates the closed forms."""
    from .streams import StreamFactory

    n_total, n_warm = _total_jobs(min_completions, warmup_frac)
    factory = StreamFactory(arrivals.seed)
    times = arrivals.arrival_times(factory.stream("arrivals"), n_total)
    svc = service_draws(factory.stream(f"service/{station.name}"), station.service, n_total)
    waits, completions = station_pass(times, svc, station.mode, station.name,
                                      queue_bound, rate_hint=arrivals.rate)
    sojourn = waits + svc
    w_post, s_post = waits[n_warm:], sojourn[n_warm:]
    mean_wait, wait_ci = batch_mean_ci(w_post)
    mean_lat, lat_ci = batch_mean_ci(s_post)
    t0 = float(times[n_warm]) if n_warm < n_total else 0.0
    t1 = float(completions.max())
    if isinstance(station.mode, AggregatedRate):
        occ_total = float(svc[n_warm:].sum()) / station.mode.k
    else:
        occ_total = float(svc[n_warm:].sum()) / station.mode.n
    busy = occ_total / (t1 - t0) if t1 > t0 else 0.0
    trace = None
    if collect_trace:
        trace = TraceData(
            station_names=(station.name,),
            request_id=np.arange(n_total),
            tenant_id=np.zeros(n_total, dtype=int),
            arrival_s=times,
            departure_s=completions,
            path=f"station:{station.name}",
            waits=(waits,),
        )
    return SimReport(
        completions=n_total - n_warm,
        mean_latency=mean_lat,
        latency_stddev=float(s_post.std(ddof=1)) if len(s_post) > 1 else 0.0,
        mean_wait_per_station=(mean_wait,),
        ci95_halfwidth=lat_ci,
        wait_ci95_halfwidth=(wait_ci,),
        station_names=(station.name,),
        little=little_check(times, completions, t0, t1),
        busy_fraction=(busy,),
        per_request_trace=trace,
    )


def simulate_on_device(dev: DeviceSpec, w: WorkloadSpec, min_completions: int, *,
                       seed: int = 0, warmup_frac: float = DEFAULT_WARMUP_FRAC,
                       queue_bound: float = DEFAULT_QUEUE_BOUND,
                       mode: ServerMode | None = None,
                       collect_trace: bool = False) -> SimReport:
    """On-device processing: one processor station fed by the device's stream."""
    if not dev.lam > 0:
        raise ValueError("simulation needs a positive device arrival rate")
    station = StationConfig("device_proc", _workload_service(w.s_dev, w.kind),
                            mode if mode is not None else AggregatedRate(dev.k))
    return simulate_station(ArrivalProcess.poisson(dev.lam, seed), station,
                            min_completions, warmup_frac=warmup_frac,
                            queue_bound=queue_bound, collect_trace=collect_trace)


def _tenant_streams(factory, edge: EdgeServerState, horizon: float
                    ) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Arrival times and service draws per background tenant, up to ``horizon``."""
    times_list, svc_list = [], []
    for i, t in enumerate(edge.tenants):
        if t.lam == 0:
            times_list.append(np.empty(0))
            svc_list.append(np.empty(0))
            continue
        rng = factory.stream(f"arrivals/tenant/{i}")
        chunks = []
        last = 0.0
        n_guess = int(t.lam * horizon * 1.05) + 64
        while last <= horizon:
            gaps = rng.exponential(1.0 / t.lam, n_guess)
            chunk = last + np.cumsum(gaps)
            chunks.append(chunk)
            last = float(chunk[-1])
        times = np.concatenate(chunks)
        times = times[times <= horizon]
        svc_rng = factory.stream(f"service/edge_proc/tenant/{i}")
        svc = service_draws(svc_rng, _classify(t.s, t.var), len(times)) if t.s > 0 \
            else np.zeros(len(times))
        times_list.append(times)
        svc_list.append(svc)
    return times_list, svc_list


def _nic_pass(factory, name: str, times: np.ndarray, rate_hint: float,
              payload: float, net: NetworkPath, queue_bound: float,
              fixed_service: bool) -> tuple[np.ndarray, np.ndarray]:
    """(waits, completions) of a NIC stage; pass-through for empty payloads."""
    if payload == 0:
        return np.zeros(len(times)), times
    mean = net.transit(payload)
    if fixed_service:
        svc = np.full(len(times), mean)
    else:
        svc = factory.stream(f"service/{name}").exponential(mean, len(times))
    return station_pass(times, svc, AggregatedRate(1.0), name, queue_bound,
                        rate_hint=rate_hint)


def _through_edge(factory, our_arrivals_at_edge: np.ndarray, our_edge_service,
                  dev: DeviceSpec, edge: EdgeServerState, net: NetworkPath,
                  d_res: float, queue_bound: float, nic_fixed_service: bool):
    """Edge processor (with tenant superposition) then shared response NIC.

    Returns per-request arrays for the tagged stream (edge wait, NIC wait,
    final completion) plus entry/exit arrays of the tenant jobs for
    system-level accounting.
    """
    n_ours = len(our_arrivals_at_edge)
    mean_s, kind_var = our_edge_service
    if mean_s > 0:
        our_svc = service_draws(factory.stream("service/edge_proc/dev"),
                                _classify(mean_s, kind_var), n_ours)
    else:
        our_svc = np.zeros(n_ours)
    # Tenants must cover the window in which tagged jobs can still be queued
    # behind them, at the edge processor and at the response NIC.
    full = edge.joined(dev.lam, mean_s, kind_var)
    rho = full.rho_edge / edge.k
    slack = 100.0 * full.s_edge_mix / max(1e-3, 1.0 - min(rho, 0.999)) + 1.0
    horizon = float(our_arrivals_at_edge.max()) + slack
    tenant_times, tenant_svc = _tenant_streams(factory, edge, horizon)

    times = np.concatenate([our_arrivals_at_edge] + tenant_times)
    svc = np.concatenate([our_svc] + tenant_svc)
    ids = np.concatenate([np.arange(n_ours)] +
                         [np.full(len(t), -1, dtype=int) for t in tenant_times])
    tenant_tag = np.concatenate([np.zeros(n_ours, dtype=int)] +
                                [np.full(len(t), i + 1, dtype=int)
                                 for i, t in enumerate(tenant_times)])
    order = np.argsort(times, kind="stable")
    times, svc, ids, tenant_tag = times[order], svc[order], ids[order], tenant_tag[order]

    lam_total = dev.lam + edge.lambda_edge
    waits_e, comp_e = station_pass(times, svc, AggregatedRate(edge.k),
                                   "edge processor", queue_bound, rate_hint=lam_total)

    order2 = np.argsort(comp_e, kind="stable")
    nic_times, nic_ids, nic_tag = comp_e[order2], ids[order2], tenant_tag[order2]
    waits_n, comp_n = _nic_pass(factory, "response_nic", nic_times, lam_total,
                                d_res, net, queue_bound, nic_fixed_service)

    ours_e = ids >= 0
    our_wait_edge = np.empty(n_ours)
    our_wait_edge[ids[ours_e]] = waits_e[ours_e]
    ours_n = nic_ids >= 0
    our_wait_nic = np.empty(n_ours)
    our_wait_nic[nic_ids[ours_n]] = waits_n[ours_n]
    our_done = np.empty(n_ours)
    our_done[nic_ids[ours_n]] = comp_n[ours_n]

    tenant_entry = times[~ours_e]
    tenant_exit = comp_n[~ours_n]
    return our_wait_edge, our_wait_nic, our_done, tenant_entry, tenant_exit


def _tandem_report(a0: np.ndarray, done: np.ndarray, wait_cols: list[np.ndarray],
                   station_names: tuple[str, ...], n_warm: int,
                   tenant_entry: np.ndarray, tenant_exit: np.ndarray,
                   path: str, collect_trace: bool) -> SimReport:
    n_total = len(a0)
    latency = done - a0
    lat_post = latency[n_warm:]
    mean_lat, lat_ci = batch_mean_ci(lat_post)
    wait_means, wait_cis = [], []
    for col in wait_cols:
        m, ci = batch_mean_ci(col[n_warm:])
        wait_means.append(m)
        wait_cis.append(ci)
    t0 = float(a0[n_warm]) if n_warm < n_total else 0.0
    t1 = float(done.max())
    entries = np.concatenate([a0, tenant_entry])
    exits = np.concatenate([done, tenant_exit])
    trace = None
    if collect_trace:
        trace = TraceData(
            station_names=station_names,
            request_id=np.arange(n_total),
            tenant_id=np.zeros(n_total, dtype=int),
            arrival_s=a0,
            departure_s=done,
            path=path,
            waits=tuple(wait_cols),
        )
    return SimReport(
        completions=n_total - n_warm,
        mean_latency=mean_lat,
        latency_stddev=float(lat_post.std(ddof=1)) if len(lat_post) > 1 else 0.0,
        mean_wait_per_station=tuple(wait_means),
        ci95_halfwidth=lat_ci,
        wait_ci95_halfwidth=tuple(wait_cis),
        station_names=station_names,
        little=little_check(entries, exits, t0, t1),
        per_request_trace=trace,
    )


def simulate_edge_offload(dev: DeviceSpec, edge: EdgeServerState, net: NetworkPath,
                          w: WorkloadSpec, min_completions: int, *, seed: int = 0,
                          warmup_frac: float = DEFAULT_WARMUP_FRAC,
                          queue_bound: float = DEFAULT_QUEUE_BOUND,
                          nic_fixed_service: bool = False,
                          collect_trace: bool = False) -> SimReport:
    """Offload tandem: device NIC -> shared edge processor -> shared edge NIC.

    Background tenant streams are superposed at the edge processor and their
    responses share the edge NIC; the report covers the tagged device's
    requests.
    """
    if not dev.lam > 0:
        raise ValueError("simulation needs a positive device arrival rate")
    from .streams import StreamFactory

    n_total, n_warm = _total_jobs(min_completions, warmup_frac)
    factory = StreamFactory(seed)
    a0 = np.cumsum(factory.stream("arrivals/device").exponential(1.0 / dev.lam, n_total))
    w1, c1 = _nic_pass(factory, "request_nic", a0, dev.lam, w.d_req, net,
                       queue_bound, nic_fixed_service)
    var_edge = w.var_edge if w.kind is WorkloadKind.VARIABLE else 0.0
    edge_service = (w.s_edge, w.s_edge * w.s_edge if w.kind is WorkloadKind.VARIABLE
                    else var_edge)
    w2, w3, done, tenant_entry, tenant_exit = _through_edge(
        factory, c1, edge_service, dev, edge, net, w.d_res, queue_bound,
        nic_fixed_service)
    return _tandem_report(a0, done, [w1, w2, w3],
                          ("request_nic", "edge_proc", "response_nic"),
                          n_warm, tenant_entry, tenant_exit, "offload", collect_trace)


def simulate_split(dev: DeviceSpec, edge: EdgeServerState, net: NetworkPath,
                   sp: SplitPoint, w: WorkloadSpec, min_completions: int, *,
                   seed: int = 0, warmup_frac: float = DEFAULT_WARMUP_FRAC,
                   queue_bound: float = DEFAULT_QUEUE_BOUND,
                   nic_fixed_service: bool = False,
                   collect_trace: bool = False) -> SimReport:
    """Split tandem: device processor -> NIC(d_inter) -> edge -> NIC(d_res).

    A split that offloads nothing never visits the edge and reduces to the
    on-device run.
    """
    if not dev.lam > 0:
        raise ValueError("simulation needs a positive device arrival rate")
    from .streams import StreamFactory

    if sp.d_inter == 0 and sp.s_edge_partial == 0:
        w_local = WorkloadSpec(sp.s_dev_partial, w.s_edge, 0.0, 0.0, w.kind,
                               w.var_dev if w.kind is WorkloadKind.VARIABLE else 0.0,
                               w.var_edge if w.kind is WorkloadKind.VARIABLE else 0.0)
        return simulate_on_device(dev, w_local, min_completions, seed=seed,
                                  warmup_frac=warmup_frac, queue_bound=queue_bound,
                                  collect_trace=collect_trace)

    n_total, n_warm = _total_jobs(min_completions, warmup_frac)
    factory = StreamFactory(seed)
    a0 = np.cumsum(factory.stream("arrivals/device").exponential(1.0 / dev.lam, n_total))
    if sp.s_dev_partial > 0:
        svc_dev = service_draws(factory.stream("service/device_proc"),
                                _workload_service(sp.s_dev_partial, w.kind), n_total)
        w0, c0 = station_pass(a0, svc_dev, AggregatedRate(dev.k), "device processor",
                              queue_bound, rate_hint=dev.lam)
        order = np.argsort(c0, kind="stable")
        inv = np.empty(n_total, dtype=int)
        inv[order] = np.arange(n_total)
        c0_sorted = c0[order]
    else:
        w0 = np.zeros(n_total)
        order = np.arange(n_total)
        inv = order
        c0_sorted = a0
    w1_sorted, c1_sorted = _nic_pass(factory, "inter_nic", c0_sorted, dev.lam,
                                     sp.d_inter, net, queue_bound, nic_fixed_service)
    w1 = w1_sorted[inv]
    edge_var = sp.s_edge_partial ** 2 if w.kind is WorkloadKind.VARIABLE else 0.0
    # Edge stage arrivals must be sorted with their request ids carried along.
    order2 = np.argsort(c1_sorted, kind="stable")
    ids_after_nic = np.arange(n_total)[order][order2]
    edge_arrivals = c1_sorted[order2]
    w2_o, w3_o, done_o, tenant_entry, tenant_exit = _through_edge(
        factory, edge_arrivals, (sp.s_edge_partial, edge_var), dev, edge, net,
        w.d_res, queue_bound, nic_fixed_service)
    # _through_edge indexes its outputs by position in `edge_arrivals`;
    # map back to original request ids.
    w2 = np.empty(n_total)
    w2[ids_after_nic] = w2_o
    w3 = np.empty(n_total)
    w3[ids_after_nic] = w3_o
    done = np.empty(n_total)
    done[ids_after_nic] = done_o
    return _tandem_report(a0, done, [w0, w1, w2, w3],
                          ("device_proc", "inter_nic", "edge_proc", "response_nic"),
                          n_warm, tenant_entry, tenant_exit, "split", collect_trace)
