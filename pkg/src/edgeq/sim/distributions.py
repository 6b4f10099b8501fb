"""Samplers for the service and interarrival distributions used by the simulator.

General service times are drawn from a two-point distribution matched to the
requested mean and variance (symmetric around the mean while the standard
deviation allows it, otherwise an atom at zero), the minimal family for
validating the M/G/1 formula.  Renewal interarrivals support deterministic,
exponential and two-phase hyperexponential (balanced means) shapes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..queueing import InterarrivalDistribution, ServiceDistribution, ServiceKind


def two_point_values(mean: float, variance: float) -> tuple[float, float, float]:
    """(low, high, p_high) of a two-point distribution with the given moments."""
    if variance == 0:
        return mean, mean, 1.0
    sd = math.sqrt(variance)
    if sd <= mean:
        return mean - sd, mean + sd, 0.5
    # Heavier than the symmetric family allows on positive support: atom at 0.
    p_zero = variance / (variance + mean * mean)
    high = (variance + mean * mean) / mean
    return 0.0, high, 1.0 - p_zero


def service_draws(rng: np.random.Generator, dist: ServiceDistribution, n: int) -> np.ndarray:
    if dist.kind is ServiceKind.DETERMINISTIC:
        return np.full(n, dist.mean_s)
    if dist.kind is ServiceKind.EXPONENTIAL:
        return rng.exponential(dist.mean_s, n)
    lo, hi, p_hi = two_point_values(dist.mean_s, dist.variance_s2)
    return np.where(rng.random(n) < p_hi, hi, lo)


def service_draw_one(rng: np.random.Generator, mean: float, var: float) -> float:
    """Single service draw for a (mean, variance) stream in the event engine."""
    if var == 0:
        return mean
    if var == mean * mean:
        return rng.exponential(mean)
    lo, hi, p_hi = two_point_values(mean, var)
    return hi if rng.random() < p_hi else lo


class InterarrivalShape(enum.Enum):
    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"
    HYPEREXPONENTIAL = "hyperexponential"


@dataclass(frozen=True)
class InterarrivalSpec:
    """Renewal interarrival shape plus its mean and variance."""

    shape: InterarrivalShape
    mean_a: float
    variance_a2: float = 0.0

    def __post_init__(self):
        if not self.mean_a > 0:
            raise ValueError(f"interarrival mean must be positive, got {self.mean_a}")
        if self.variance_a2 < 0:
            raise ValueError("interarrival variance must be >= 0")
        scv = self.variance_a2 / (self.mean_a * self.mean_a)
        if self.shape is InterarrivalShape.DETERMINISTIC and self.variance_a2 != 0:
            raise ValueError("deterministic interarrivals have zero variance")
        if self.shape is InterarrivalShape.HYPEREXPONENTIAL and scv <= 1.0:
            raise ValueError("hyperexponential needs squared coefficient of variation > 1")

    @classmethod
    def deterministic(cls, mean_a: float) -> "InterarrivalSpec":
        return cls(InterarrivalShape.DETERMINISTIC, mean_a, 0.0)

    @classmethod
    def exponential(cls, mean_a: float) -> "InterarrivalSpec":
        return cls(InterarrivalShape.EXPONENTIAL, mean_a, mean_a * mean_a)

    @classmethod
    def hyperexponential(cls, mean_a: float, variance_a2: float) -> "InterarrivalSpec":
        return cls(InterarrivalShape.HYPEREXPONENTIAL, mean_a, variance_a2)

    def moments(self) -> InterarrivalDistribution:
        return InterarrivalDistribution(self.mean_a, self.variance_a2)


def interarrival_draws(rng: np.random.Generator, spec: InterarrivalSpec, n: int) -> np.ndarray:
    if spec.shape is InterarrivalShape.DETERMINISTIC:
        return np.full(n, spec.mean_a)
    if spec.shape is InterarrivalShape.EXPONENTIAL:
        return rng.exponential(spec.mean_a, n)
    # Two-phase hyperexponential with balanced means: p_i / mu_i = mean / 2.
    scv = spec.variance_a2 / (spec.mean_a * spec.mean_a)
    p1 = 0.5 * (1.0 + math.sqrt((scv - 1.0) / (scv + 1.0)))
    m1 = spec.mean_a / (2.0 * p1)
    m2 = spec.mean_a / (2.0 * (1.0 - p1))
    branch = rng.random(n) < p1
    draws = rng.exponential(1.0, n)
    return draws * np.where(branch, m1, m2)


@dataclass(frozen=True)
class ArrivalProcess:
    """Seeded arrival stream: Poisson or renewal with a named interarrival shape."""

    interarrival: InterarrivalSpec
    seed: int = 0

    @classmethod
    def poisson(cls, rate: float, seed: int = 0) -> "ArrivalProcess":
        if not rate > 0:
            raise ValueError(f"Poisson rate must be positive, got {rate}")
        return cls(InterarrivalSpec.exponential(1.0 / rate), seed)

    @classmethod
    def renewal(cls, spec: InterarrivalSpec, seed: int = 0) -> "ArrivalProcess":
        return cls(spec, seed)

    @property
    def rate(self) -> float:
        return 1.0 / self.interarrival.mean_a

    def arrival_times(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.cumsum(interarrival_draws(rng, self.interarrival, n))
