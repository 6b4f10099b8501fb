"""Closed-form device-vs-edge decision inequalities and crossover search.

The three ``lemma*_holds`` predicates evaluate the decision inequalities in
their rearranged closed form (service-time gap against the network and
queueing terms); each is algebraically equivalent to comparing the two
latency predictors directly, which the test suite verifies exhaustively.

``find_crossovers`` locates the parameter values at which the preferred
strategy flips along a single swept parameter, via a dense scan followed by
bisection.  Parameter ranges where one strategy is saturated count as
automatic wins for the stable side.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import (
    EmptyFeasibleRangeError,
    MultiTenantError,
    UnstableError,
    WrongDistributionError,
)
from .latency import (
    DeviceSpec,
    EdgeServerState,
    NetworkPath,
    RhoPolicy,
    Tenant,
    WorkloadKind,
    WorkloadSpec,
    predict_edge_offload,
    predict_on_device,
)
from .queueing import STABILITY_MARGIN

#: Latency differences smaller than this are reported as ties and resolved
#: in favor of on-device processing (which has no network dependence).
TIE_EPS = 1e-12


@dataclass(frozen=True)
class Scenario:
    """One comparison setting: device, edge background tenants, network, workload."""

    dev: DeviceSpec
    edge: EdgeServerState
    net: NetworkPath
    w: WorkloadSpec


class SweepParam(enum.Enum):
    BANDWIDTH = "bandwidth"
    LAMBDA = "lambda"
    TENANT_COUNT = "tenant_count"
    S_DEV = "s_dev"


class CrossDirection(enum.Enum):
    """Which strategy the preference flips to as the parameter increases."""

    TO_DEVICE = "to_device"
    TO_EDGE = "to_edge"


@dataclass(frozen=True)
class Crossing:
    value: float
    direction: CrossDirection


@dataclass(frozen=True)
class CrossoverResult:
    swept_param: SweepParam
    crossings: tuple[Crossing, ...]
    feasible_range: tuple[float, float]


def t_device(sc: Scenario) -> float:
    return predict_on_device(sc.dev, sc.w)


def t_edge(sc: Scenario, rho_policy: RhoPolicy = RhoPolicy.K_FOLDED) -> float:
    return predict_edge_offload(sc.dev, sc.edge, sc.net, sc.w, rho_policy=rho_policy)


def _check_rhs_stable(lam: float, mu: float, stage: str) -> None:
    if lam >= mu * (1.0 - STABILITY_MARGIN):
        raise UnstableError(stage=stage, lam=lam, mu_eff=mu)


def _nic_term(lam: float, mu: float) -> float:
    if not math.isfinite(mu):
        return 0.0
    return lam / (mu * (mu - lam))


def _mm1_term(lam: float, mu_eff: float) -> float:
    return 1.0 / (mu_eff - lam) - 1.0 / mu_eff


def lemma1_holds(sc: Scenario) -> bool:
    """True when on-device processing beats offloading (single tenant, M/D/1).

    Evaluates ``s_dev - s_edge`` against the sum of both NIC waits, the
    transmission times, and the M/D/1 wait difference between edge and
    device; equivalent to ``t_device(sc) < t_edge(sc)``.
    """
    if sc.edge.tenants:
        raise MultiTenantError("background tenants present; use lemma2_holds")
    if sc.w.kind is not WorkloadKind.DETERMINISTIC:
        raise WrongDistributionError("deterministic workload required; use lemma3_holds")
    lam = sc.dev.lam
    w, net = sc.w, sc.net
    mu_req, mu_res = net.rate(w.d_req), net.rate(w.d_res)
    mu_dev_eff = sc.dev.k / w.s_dev
    mu_edge_eff = sc.edge.k / w.s_edge
    if math.isfinite(mu_req):
        _check_rhs_stable(lam, mu_req, "request NIC")
    if math.isfinite(mu_res):
        _check_rhs_stable(lam, mu_res, "response NIC")
    _check_rhs_stable(lam, mu_dev_eff, "device processor")
    _check_rhs_stable(lam, mu_edge_eff, "edge processor")
    rhs = (_nic_term(lam, mu_req)
           + _nic_term(lam, mu_res)
           + (w.d_req + w.d_res) / net.bandwidth
           + 0.5 * _mm1_term(lam, mu_edge_eff)
           - 0.5 * _mm1_term(lam, mu_dev_eff))
    return w.s_dev - w.s_edge < rhs


def lemma2_holds(sc: Scenario, rho_policy: RhoPolicy = RhoPolicy.K_FOLDED) -> bool:
    """True when on-device processing beats offloading to a shared edge.

    The edge wait uses the service-time mixture over all tenant streams
    (device's own stream included); equivalent to the predictor comparison.
    """
    if sc.w.kind is not WorkloadKind.DETERMINISTIC:
        raise WrongDistributionError("deterministic workload required; use lemma3_holds")
    lam = sc.dev.lam
    w, net = sc.w, sc.net
    full = sc.edge.joined(lam, w.s_edge, 0.0)
    lam_e = full.lambda_edge
    mu_req, mu_res = net.rate(w.d_req), net.rate(w.d_res)
    mu_dev_eff = sc.dev.k / w.s_dev
    if math.isfinite(mu_req):
        _check_rhs_stable(lam, mu_req, "request NIC")
    if math.isfinite(mu_res):
        _check_rhs_stable(lam_e, mu_res, "response NIC")
    _check_rhs_stable(lam, mu_dev_eff, "device processor")
    s_mix = full.s_edge_mix
    if s_mix > 0:
        _check_rhs_stable(lam_e, full.k / s_mix, "edge processor")
    if lam_e == 0 or s_mix == 0:
        mix_term = 0.0
    elif full.var_mix == 0.0:
        mix_term = 0.5 * _mm1_term(lam_e, full.k / s_mix)
    elif rho_policy is RhoPolicy.K_FOLDED:
        mu_eff = full.k / s_mix
        es2_eff = (full.var_mix + s_mix * s_mix) / (full.k * full.k)
        mix_term = lam_e * es2_eff / (2.0 * (1.0 - lam_e / mu_eff))
    else:
        mu = 1.0 / s_mix
        mix_term = (lam_e * s_mix + lam_e * full.k * mu * full.var_mix) \
            / (2.0 * (full.k * mu - lam_e))
    rhs = (_nic_term(lam, mu_req)
           + _nic_term(lam_e, mu_res)
           + (w.d_req + w.d_res) / net.bandwidth
           + mix_term
           - 0.5 * _mm1_term(lam, mu_dev_eff))
    return w.s_dev - w.s_edge < rhs


def lemma3_holds(sc: Scenario) -> bool:
    """True when on-device processing beats offloading for variable workloads.

    Both processors are modeled as M/M/1 with aggregated service rates;
    equivalent to the predictor comparison with variable service kind.
    """
    if sc.w.kind is not WorkloadKind.VARIABLE:
        raise WrongDistributionError("variable workload required; use lemma1/lemma2")
    lam = sc.dev.lam
    w, net = sc.w, sc.net
    full = sc.edge.joined(lam, w.s_edge, w.var_edge)
    lam_e = full.lambda_edge
    mu_req, mu_res = net.rate(w.d_req), net.rate(w.d_res)
    mu_dev_eff = sc.dev.k / w.s_dev
    if math.isfinite(mu_req):
        _check_rhs_stable(lam, mu_req, "request NIC")
    if math.isfinite(mu_res):
        _check_rhs_stable(lam_e, mu_res, "response NIC")
    _check_rhs_stable(lam, mu_dev_eff, "device processor")
    s_mix = full.s_edge_mix
    if lam_e > 0 and s_mix > 0:
        mu_edge_eff = full.k / s_mix
        _check_rhs_stable(lam_e, mu_edge_eff, "edge processor")
        edge_term = _mm1_term(lam_e, mu_edge_eff)
    else:
        edge_term = 0.0
    rhs = (_nic_term(lam, mu_req)
           + _nic_term(lam_e, mu_res)
           + (w.d_req + w.d_res) / net.bandwidth
           + edge_term
           - _mm1_term(lam, mu_dev_eff))
    return w.s_dev - w.s_edge < rhs


def apply_param(sc: Scenario, param: SweepParam, value: float) -> Scenario:
    """Scenario with one swept parameter replaced.

    ``TENANT_COUNT`` is the total number of identical tenants sharing the
    edge, the predicting device included: the background becomes an
    aggregate stream of rate ``(value - 1) * dev.lam`` with the device's
    edge service profile, which is continuous in ``value``.
    """
    if param is SweepParam.BANDWIDTH:
        return replace(sc, net=NetworkPath(value))
    if param is SweepParam.LAMBDA:
        return replace(sc, dev=replace(sc.dev, lam=value))
    if param is SweepParam.S_DEV:
        return replace(sc, w=replace(sc.w, s_dev=value))
    if param is SweepParam.TENANT_COUNT:
        if value < 1.0:
            raise ValueError("tenant count includes the device itself; need >= 1")
        var = sc.w.var_edge if sc.w.kind is WorkloadKind.VARIABLE else 0.0
        extra = (value - 1.0) * sc.dev.lam
        tenants = (Tenant(extra, sc.w.s_edge, var),) if extra > 0 else ()
        return replace(sc, edge=EdgeServerState(sc.edge.k, tenants))
    raise ValueError(f"unknown sweep parameter {param}")


def _diff_sign(sc: Scenario, rho_policy: RhoPolicy) -> tuple[int | None, float]:
    """Sign of t_device - t_edge with instability folded in.

    Returns (sign, diff): sign is -1 when the device is preferred, +1 when
    the edge is preferred, None when neither strategy is stable.  An
    unstable strategy loses outright (diff is +/-inf).
    """
    try:
        td = t_device(sc)
    except UnstableError:
        td = math.inf
    try:
        te = t_edge(sc, rho_policy)
    except UnstableError:
        te = math.inf
    if math.isinf(td) and math.isinf(te):
        return None, math.nan
    diff = td - te
    if math.isnan(diff):  # inf - inf cannot occur here, but guard anyway
        return None, math.nan
    if abs(diff) < TIE_EPS:
        return -1, diff
    return (1 if diff > 0 else -1), diff


def find_crossovers(sc: Scenario, param: SweepParam, span: tuple[float, float],
                    resolution: int = 201, *,
                    rho_policy: RhoPolicy = RhoPolicy.K_FOLDED) -> CrossoverResult:
    """Locate preferred-strategy flips of one parameter over ``span``.

    Scans ``resolution`` evenly spaced points, then bisects each
    sign-change bracket to a relative tolerance of 1e-6 on the parameter
    value.  Points where both strategies are saturated are infeasible; if
    every scanned point is infeasible, EmptyFeasibleRangeError is raised.
    """
    lo, hi = span
    if not (hi > lo):
        raise ValueError(f"empty sweep span {span}")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    xs = [lo + (hi - lo) * i / (resolution - 1) for i in range(resolution)]
    signs = [_diff_sign(apply_param(sc, param, x), rho_policy)[0] for x in xs]
    feasible = [x for x, s in zip(xs, signs) if s is not None]
    if not feasible:
        raise EmptyFeasibleRangeError(
            f"no stable strategy anywhere in {param.value} span {span}")

    def sign_at(x: float) -> int | None:
        return _diff_sign(apply_param(sc, param, x), rho_policy)[0]

    crossings = []
    for (xa, sa), (xb, sb) in zip(zip(xs, signs), zip(xs[1:], signs[1:])):
        if sa is None or sb is None or sa == sb:
            continue
        a, b = xa, xb
        for _ in range(200):
            if (b - a) <= 1e-6 * max(abs(a), abs(b), 1e-30):
                break
            mid = 0.5 * (a + b)
            sm = sign_at(mid)
            if sm == sa:
                a = mid
            else:
                b = mid
        x_cross = 0.5 * (a + b)
        direction = CrossDirection.TO_DEVICE if sb < 0 else CrossDirection.TO_EDGE
        crossings.append(Crossing(x_cross, direction))
    return CrossoverResult(
        swept_param=param,
        crossings=tuple(crossings),
        feasible_range=(min(feasible), max(feasible)),
    )
