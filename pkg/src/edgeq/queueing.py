"""Closed-form expected-wait evaluators for the queueing systems used here.

Units are seconds for times, 1/second for rates, throughout the package.

A station with parallelism ``k`` (a positive real, not necessarily an
integer) is evaluated as a single FCFS server with aggregated service rate
``mu_eff = k / mean_s``.  Where a service-time moment is needed (the M/G/1
numerator), the effective per-request service time is ``mean_s / k`` with
variance ``variance_s2 / k**2``; this keeps the Var=0 -> M/D/1 and
Var=mean^2 -> M/M/1 reductions of the general formula exact.

All functions are pure and operate on frozen value types, so they are safe
to call from any number of concurrent callers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InconsistentRateError, UnstableError, WrongDistributionError

#: Evaluation refuses utilizations at or above ``1 - STABILITY_MARGIN``
#: instead of returning huge, meaningless finite waits near saturation.
STABILITY_MARGIN = 1e-9


class ServiceKind(enum.Enum):
    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"
    GENERAL = "general"


@dataclass(frozen=True)
class ServiceDistribution:
    """A service-time distribution summarized by its kind, mean and variance."""

    kind: ServiceKind
    mean_s: float
    variance_s2: float

    def __post_init__(self):
        if not self.mean_s > 0:
            raise ValueError(f"service mean must be positive, got {self.mean_s}")
        if self.variance_s2 < 0:
            raise ValueError(f"service variance must be >= 0, got {self.variance_s2}")
        if self.kind is ServiceKind.DETERMINISTIC and self.variance_s2 != 0.0:
            raise ValueError("deterministic service must have zero variance")
        if self.kind is ServiceKind.EXPONENTIAL and self.variance_s2 != self.mean_s * self.mean_s:
            raise ValueError("exponential service must have variance mean^2")

    @classmethod
    def deterministic(cls, mean_s: float) -> "ServiceDistribution":
        return cls(ServiceKind.DETERMINISTIC, mean_s, 0.0)

    @classmethod
    def exponential(cls, mean_s: float) -> "ServiceDistribution":
        return cls(ServiceKind.EXPONENTIAL, mean_s, mean_s * mean_s)

    @classmethod
    def general(cls, mean_s: float, variance_s2: float) -> "ServiceDistribution":
        return cls(ServiceKind.GENERAL, mean_s, variance_s2)


@dataclass(frozen=True)
class QueueSpec:
    """Arrival rate, service-time distribution and parallelism of one queue."""

    lam: float
    service: ServiceDistribution
    k: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"arrival rate must be >= 0, got {self.lam}")
        if not self.k > 0:
            raise ValueError(f"parallelism must be positive, got {self.k}")

    @property
    def mu_eff(self) -> float:
        """Aggregated service rate k / mean_s."""
        return self.k / self.service.mean_s


@dataclass(frozen=True)
class InterarrivalDistribution:
    """Mean and variance of a renewal process's interarrival time."""

    mean_a: float
    variance_a2: float

    def __post_init__(self):
        if not self.mean_a > 0:
            raise ValueError(f"interarrival mean must be positive, got {self.mean_a}")
        if self.variance_a2 < 0:
            raise ValueError(f"interarrival variance must be >= 0, got {self.variance_a2}")


def _check_stable(lam: float, mu_eff: float, stage: str | None = None) -> None:
    if lam >= mu_eff * (1.0 - STABILITY_MARGIN):
        raise UnstableError(stage=stage, lam=lam, mu_eff=mu_eff)


def utilization(q: QueueSpec) -> float:
    """Utilization lam * mean_s / k.  No upper bound is enforced here."""
    return q.lam * q.service.mean_s / q.k


def wait_mm1(q: QueueSpec) -> float:
    """Expected queueing wait of an M/M/1 queue with aggregated rate k/mean_s.

    Equals ``1/(mu - lam) - 1/mu`` with ``mu = k / mean_s``; evaluated in the
    cancellation-free form ``lam / (mu * (mu - lam))``.  The service-kind tag
    is ignored: this is also the NIC wait model, where payload transmission
    is treated as exponential.
    """
    mu = q.mu_eff
    _check_stable(q.lam, mu)
    return q.lam / (mu * (mu - q.lam))


def wait_md1(q: QueueSpec) -> float:
    """Expected queueing wait of an M/D/1 queue with aggregated rate k/mean_s.

    Exactly half the M/M/1 wait at every stable operating point.
    """
    if q.service.kind is not ServiceKind.DETERMINISTIC:
        raise WrongDistributionError(
            f"M/D/1 wait needs deterministic service, got {q.service.kind.value}")
    return 0.5 * wait_mm1(q)


def wait_mg1(q: QueueSpec) -> float:
    """Expected M/G/1 queueing wait (Pollaczek-Khinchine).

    Evaluated as ``lam * E[S_eff^2] / (2 * (1 - rho))`` with the effective
    second moment ``(variance_s2 + mean_s^2) / k^2``.  Reduces to
    :func:`wait_md1` when the variance is zero and to :func:`wait_mm1` when
    it equals ``mean_s^2``.
    """
    mu = q.mu_eff
    _check_stable(q.lam, mu)
    rho = q.lam / mu
    es2_eff = (q.service.variance_s2 + q.service.mean_s * q.service.mean_s) / (q.k * q.k)
    return q.lam * es2_eff / (2.0 * (1.0 - rho))


def wait_gg1_upper_bound(lam: float, inter: InterarrivalDistribution,
                         service: ServiceDistribution, k: float = 1.0) -> float:
    """Upper bound on the G/G/1 expected wait (Marshall).

    ``lam * (sigma_a^2 + sigma_s^2) / (2 * (1 - rho))`` where the service
    variance is folded by parallelism (``variance_s2 / k**2``) for
    consistency with the other evaluators.  Requires ``lam * mean_a == 1``
    to within 1e-9.
    """
    if abs(lam * inter.mean_a - 1.0) > 1e-9:
        raise InconsistentRateError(
            f"arrival rate {lam:g} inconsistent with interarrival mean {inter.mean_a:g}")
    if not k > 0:
        raise ValueError(f"parallelism must be positive, got {k}")
    _check_stable(lam, k / service.mean_s)
    rho = lam * service.mean_s / k
    sigma_s2_eff = service.variance_s2 / (k * k)
    return lam * (inter.variance_a2 + sigma_s2_eff) / (2.0 * (1.0 - rho))
