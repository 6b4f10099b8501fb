"""End-to-end latency predictors for on-device, offloaded and split execution.

The offload path is a three-station tandem: device NIC (M/M/1 at rate
``B / d_req``), edge processor (M/D/1, M/G/1 mixture or M/M/1 depending on
the workload and tenancy), and edge NIC (M/M/1 at rate ``B / d_res``).
NIC service rates are derived from the payload of the relevant direction,
so the mean NIC service time equals the transmission time.

``EdgeServerState`` holds the *background* tenants of an edge server (other
devices sharing it).  The predicting device's own stream joins the edge
aggregate inside the predictors unless ``include_device_load=False``, which
evaluates the edge stage with the background load only.

Payloads are bits, bandwidth is bits/second, times are seconds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import UnstableError
from .queueing import (
    QueueSpec,
    ServiceDistribution,
    STABILITY_MARGIN,
    wait_mg1,
    wait_mm1,
)


class WorkloadKind(enum.Enum):
    DETERMINISTIC = "deterministic"
    VARIABLE = "variable"


@dataclass(frozen=True)
class WorkloadSpec:
    """Per-request compute and payload characteristics.

    ``var_dev`` / ``var_edge`` describe the measured service-time dispersion
    of variable workloads; the variable-kind predictors model both
    processors as M/M/1 and the matching simulations draw exponential
    service times.
    """

    s_dev: float
    s_edge: float
    d_req: float
    d_res: float
    kind: WorkloadKind = WorkloadKind.DETERMINISTIC
    var_dev: float = 0.0
    var_edge: float = 0.0

    def __post_init__(self):
        if not self.s_dev > 0 or not self.s_edge > 0:
            raise ValueError("service times must be positive")
        if self.d_req < 0 or self.d_res < 0:
            raise ValueError("payload sizes must be >= 0")
        if self.var_dev < 0 or self.var_edge < 0:
            raise ValueError("service variances must be >= 0")
        if self.kind is WorkloadKind.DETERMINISTIC and (self.var_dev or self.var_edge):
            raise ValueError("deterministic workloads must have zero variance")


@dataclass(frozen=True)
class NetworkPath:
    """Device-to-edge network path; NIC rates derive from payload sizes."""

    bandwidth: float

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")

    def rate(self, payload_bits: float) -> float:
        """NIC service rate for a payload: B / D (infinite for empty payloads)."""
        if payload_bits == 0:
            return math.inf
        return self.bandwidth / payload_bits

    def transit(self, payload_bits: float) -> float:
        """Transmission time D / B."""
        return payload_bits / self.bandwidth


@dataclass(frozen=True)
class DeviceSpec:
    lam: float
    k: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"arrival rate must be >= 0, got {self.lam}")
        if not self.k > 0:
            raise ValueError(f"parallelism must be positive, got {self.k}")


class Tenant(NamedTuple):
    """One stream processed at an edge server: rate, mean service, variance."""

    lam: float
    s: float
    var: float = 0.0


@dataclass(frozen=True)
class EdgeServerState:
    """Tenant set sharing one edge accelerator, with mixture statistics.

    ``tenants`` are the background streams; aggregate statistics follow the
    Poisson-superposition / service-mixture model: arrival rates add, the
    mixture mean is the rate-weighted mean of per-tenant means, and the
    mixture second moment is the rate-weighted mean of ``var_i + s_i^2``.
    """

    k: float = 1.0
    tenants: tuple[Tenant, ...] = ()

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"parallelism must be positive, got {self.k}")
        object.__setattr__(self, "tenants", tuple(Tenant(*t) for t in self.tenants))
        for t in self.tenants:
            if t.lam < 0 or t.s < 0 or t.var < 0:
                raise ValueError(f"tenant fields must be >= 0, got {t}")

    @property
    def lambda_edge(self) -> float:
        return sum(t.lam for t in self.tenants)

    @property
    def s_edge_mix(self) -> float:
        lam = self.lambda_edge
        if lam == 0:
            return 0.0
        return sum(t.lam / lam * t.s for t in self.tenants)

    @property
    def e_s2_mix(self) -> float:
        lam = self.lambda_edge
        if lam == 0:
            return 0.0
        return sum(t.lam / lam * (t.var + t.s * t.s) for t in self.tenants)

    @property
    def var_mix(self) -> float:
        mean = self.s_edge_mix
        return max(0.0, self.e_s2_mix - mean * mean)

    @property
    def rho_edge(self) -> float:
        """Aggregate utilization lambda_edge * s_edge_mix (no parallelism folding)."""
        return self.lambda_edge * self.s_edge_mix

    def joined(self, lam: float, s: float, var: float = 0.0) -> "EdgeServerState":
        """State with one more stream added (used to fold in the device's own load)."""
        if lam == 0:
            return self
        return EdgeServerState(self.k, self.tenants + (Tenant(lam, s, var),))


@dataclass(frozen=True)
class SplitPoint:
    """Partial device/edge work and the intermediate payload shipped between them."""

    s_dev_partial: float
    s_edge_partial: float
    d_inter: float

    def __post_init__(self):
        if self.s_dev_partial < 0 or self.s_edge_partial < 0 or self.d_inter < 0:
            raise ValueError("split point fields must be >= 0")


class RhoPolicy(enum.Enum):
    """Utilization convention in the multi-tenant mixture wait.

    K_FOLDED uses the fully parallelism-folded Pollaczek-Khinchine form
    (exact M/D/1 and M/M/1 reductions).  LITERAL keeps the unfolded
    utilization ``lambda_edge * s_mix`` in the numerator together with the
    ``lambda * k * mu * Var`` variance term, which matches a commonly
    printed form of the mixture bound; the two agree at k = 1.  See the
    README for a comparison.
    """

    K_FOLDED = "k_folded"
    LITERAL = "literal"


@dataclass(frozen=True)
class OffloadBreakdown:
    """Per-term decomposition of the offload latency prediction."""

    req_wait: float
    req_transit: float
    edge_wait: float
    edge_service: float
    res_wait: float
    res_transit: float

    @property
    def total(self) -> float:
        return (self.req_wait + self.req_transit + self.edge_wait
                + self.edge_service + self.res_wait + self.res_transit)


@dataclass(frozen=True)
class SplitBreakdown:
    """Per-term decomposition of the split-processing latency prediction."""

    dev_wait: float
    dev_service: float
    inter_wait: float
    inter_transit: float
    edge_wait: float
    edge_service: float
    res_wait: float
    res_transit: float

    @property
    def total(self) -> float:
        return (self.dev_wait + self.dev_service
                + self.inter_wait + self.inter_transit
                + self.edge_wait + self.edge_service
                + self.res_wait + self.res_transit)


def _nic_wait(lam: float, rate: float, stage: str) -> float:
    """M/M/1 wait at a NIC with the given service rate."""
    if not math.isfinite(rate):
        return 0.0
    if lam >= rate * (1.0 - STABILITY_MARGIN):
        raise UnstableError(stage=stage, lam=lam, mu_eff=rate)
    return lam / (rate * (rate - lam))


def _device_wait(lam: float, s: float, k: float, kind: WorkloadKind,
                 stage: str = "device processor") -> float:
    """Processing wait at the device: M/D/1 for deterministic work, M/M/1 otherwise."""
    if lam == 0 or s == 0:
        return 0.0
    try:
        q = QueueSpec(lam, ServiceDistribution.deterministic(s), k)
        w = wait_mm1(q)
    except UnstableError as e:
        raise UnstableError(stage=stage, lam=e.lam, mu_eff=e.mu_eff) from None
    return w if kind is WorkloadKind.VARIABLE else 0.5 * w


def _edge_wait(full: EdgeServerState, kind: WorkloadKind, rho_policy: RhoPolicy,
               stage: str = "edge processor") -> float:
    """Processing wait at the edge over the full (background + device) mixture."""
    lam_e = full.lambda_edge
    if lam_e == 0:
        return 0.0
    s_mix = full.s_edge_mix
    if s_mix == 0:
        return 0.0
    v_mix = full.var_mix
    mu_eff = full.k / s_mix
    if lam_e >= mu_eff * (1.0 - STABILITY_MARGIN):
        raise UnstableError(stage=stage, lam=lam_e, mu_eff=mu_eff)
    if kind is WorkloadKind.VARIABLE:
        return wait_mm1(QueueSpec(lam_e, ServiceDistribution.exponential(s_mix), full.k))
    if v_mix == 0.0:
        # Single-tenant (or uniform) deterministic mixture: exact M/D/1 value.
        return 0.5 * wait_mm1(QueueSpec(lam_e, ServiceDistribution.deterministic(s_mix), full.k))
    if rho_policy is RhoPolicy.K_FOLDED:
        return wait_mg1(QueueSpec(lam_e, ServiceDistribution.general(s_mix, v_mix), full.k))
    mu = 1.0 / s_mix
    return (lam_e * s_mix + lam_e * full.k * mu * v_mix) / (2.0 * (full.k * mu - lam_e))


def _edge_mixture(dev: DeviceSpec, edge: EdgeServerState, w: WorkloadSpec,
                  s_edge: float, include_device_load: bool) -> EdgeServerState:
    if not include_device_load:
        return edge
    var = w.var_edge if w.kind is WorkloadKind.VARIABLE else 0.0
    return edge.joined(dev.lam, s_edge, var)


def predict_on_device(dev: DeviceSpec, w: WorkloadSpec) -> float:
    """Expected end-to-end latency of local processing: device wait + service."""
    return _device_wait(dev.lam, w.s_dev, dev.k, w.kind) + w.s_dev


def offload_breakdown(dev: DeviceSpec, edge: EdgeServerState, net: NetworkPath,
                      w: WorkloadSpec, *, include_device_load: bool = True,
                      rho_policy: RhoPolicy = RhoPolicy.K_FOLDED) -> OffloadBreakdown:
    """Component terms of the edge-offload latency prediction.

    The request NIC sees the device's own rate; the edge processor and the
    response NIC see the aggregate edge rate (results return through the
    shared edge NIC only as tasks complete).
    """
    full = _edge_mixture(dev, edge, w, w.s_edge, include_device_load)
    lam_res = full.lambda_edge
    return OffloadBreakdown(
        req_wait=_nic_wait(dev.lam, net.rate(w.d_req), "request NIC"),
        req_transit=net.transit(w.d_req),
        edge_wait=_edge_wait(full, w.kind, rho_policy),
        edge_service=w.s_edge,
        res_wait=_nic_wait(lam_res, net.rate(w.d_res), "response NIC"),
        res_transit=net.transit(w.d_res),
    )


def predict_edge_offload(dev: DeviceSpec, edge: EdgeServerState, net: NetworkPath,
                         w: WorkloadSpec, *, include_device_load: bool = True,
                         rho_policy: RhoPolicy = RhoPolicy.K_FOLDED) -> float:
    """Expected end-to-end latency of offloading one request to the edge."""
    return offload_breakdown(dev, edge, net, w, include_device_load=include_device_load,
                             rho_policy=rho_policy).total


def split_breakdown(dev: DeviceSpec, edge: EdgeServerState, net: NetworkPath,
                    sp: SplitPoint, w: WorkloadSpec, *,
                    include_device_load: bool = True,
                    rho_policy: RhoPolicy = RhoPolicy.K_FOLDED) -> SplitBreakdown:
    """Component terms of the split-processing (device + edge tandem) prediction.

    When the split point offloads nothing (zero intermediate payload and
    zero edge work) the request never visits the edge, so all network and
    edge terms vanish and the prediction reduces to on-device processing.
    """
    dev_wait = _device_wait(dev.lam, sp.s_dev_partial, dev.k, w.kind)
    if sp.d_inter == 0 and sp.s_edge_partial == 0:
        return SplitBreakdown(dev_wait, sp.s_dev_partial, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    full = _edge_mixture(dev, edge, w, sp.s_edge_partial, include_device_load)
    lam_res = full.lambda_edge
    return SplitBreakdown(
        dev_wait=dev_wait,
        dev_service=sp.s_dev_partial,
        inter_wait=_nic_wait(dev.lam, net.rate(sp.d_inter), "intermediate NIC"),
        inter_transit=net.transit(sp.d_inter),
        edge_wait=_edge_wait(full, w.kind, rho_policy),
        edge_service=sp.s_edge_partial,
        res_wait=_nic_wait(lam_res, net.rate(w.d_res), "response NIC"),
        res_transit=net.transit(w.d_res),
    )


def predict_split(dev: DeviceSpec, edge: EdgeServerState, net: NetworkPath,
                  sp: SplitPoint, w: WorkloadSpec, *,
                  include_device_load: bool = True,
                  rho_policy: RhoPolicy = RhoPolicy.K_FOLDED) -> float:
    """Expected end-to-end latency of split processing at the given split point."""
    return split_breakdown(dev, edge, net, sp, w,
                           include_device_load=include_device_load,
                           rho_policy=rho_policy).total
