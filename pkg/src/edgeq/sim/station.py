"""FCFS station kernels.

An ``AggregatedRate(k)`` station is a single FCFS queue whose serving slot
is occupied for ``s / k`` per request (the aggregated-rate approximation of
a k-parallel accelerator), while the request itself finishes processing,
and is forwarded downstream, after its full service time ``s``.  At k = 1
the two coincide.  ``DiscreteServers(n)`` runs n parallel servers each
taking the full service time, for quantifying the aggregation gap.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..errors import UnstableError
from ..queueing import ServiceDistribution

#: Abort a run when the implied backlog at any station exceeds this.
DEFAULT_QUEUE_BOUND = 1_000_000


@dataclass(frozen=True)
class AggregatedRate:
    k: float = 1.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"parallelism must be positive, got {self.k}")


@dataclass(frozen=True)
class DiscreteServers:
    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"server count must be >= 1, got {self.n}")


ServerMode = AggregatedRate | DiscreteServers


@dataclass(frozen=True)
class StationConfig:
    """One FCFS station: service-time distribution plus server mode."""

    name: str
    service: ServiceDistribution
    mode: ServerMode = AggregatedRate(1.0)


def fcfs_waits(arrivals: np.ndarray, occupancy: np.ndarray) -> np.ndarray:
    """Queueing waits of a single FCFS server, by the Lindley recursion.

    ``occupancy[i]`` is how long request i holds the serving slot.  Both
    arrays are in arrival order; arrivals must be nondecreasing.
    """
    if len(arrivals) == 0:
        return np.empty(0)
    u = occupancy[:-1] - np.diff(arrivals)
    p = np.concatenate(([0.0], np.cumsum(u)))
    return p - np.minimum.accumulate(p)


def discrete_waits(arrivals: np.ndarray, service: np.ndarray, n: int) -> np.ndarray:
    """Queueing waits of an FCFS queue feeding n parallel servers."""
    waits = np.empty(len(arrivals))
    free: list[float] = [0.0] * n
    heapq.heapify(free)
    for i, (a, s) in enumerate(zip(arrivals, service)):
        t_free = heapq.heappop(free)
        start = a if a >= t_free else t_free
        waits[i] = start - a
        heapq.heappush(free, start + s)
    return waits


def station_pass(arrivals: np.ndarray, service: np.ndarray, mode: ServerMode,
                 name: str, queue_bound: float = DEFAULT_QUEUE_BOUND,
                 rate_hint: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(waits, completions) for one station, in arrival order.

    Completions are ``arrival + wait + full service``; in aggregated mode
    the serving slot itself is freed after ``service / k``.  Aborts with
    UnstableError when the implied backlog (arrival rate times the largest
    observed wait) exceeds ``queue_bound``.
    """
    if isinstance(mode, AggregatedRate):
        waits = fcfs_waits(arrivals, service / mode.k)
    else:
        waits = discrete_waits(arrivals, service, mode.n)
    if len(arrivals) > 1:
        rate = rate_hint
        if rate is None:
            span = arrivals[-1] - arrivals[0]
            rate = (len(arrivals) - 1) / span if span > 0 else np.inf
        backlog = rate * float(waits.max())
        if backlog > queue_bound:
            raise UnstableError(stage=name)
    return waits, arrivals + waits + service
