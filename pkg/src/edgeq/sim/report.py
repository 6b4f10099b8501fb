"""Simulation summaries: batch-means confidence intervals, Little's-law
bookkeeping and the per-request trace format."""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

MIN_BATCHES = 30


def batch_mean_ci(values: np.ndarray, n_batches: int = MIN_BATCHES) -> tuple[float, float]:
    """(mean, 95% CI half-width) of a correlated series via batch means."""
    n = len(values)
    if n == 0:
        return float("nan"), float("nan")
    if n < 2 * n_batches:
        return float(np.mean(values)), float("inf")
    per = n // n_batches
    trimmed = values[: per * n_batches]
    means = trimmed.reshape(n_batches, per).mean(axis=1)
    half = float(sps.t.ppf(0.975, n_batches - 1) * means.std(ddof=1) / np.sqrt(n_batches))
    return float(np.mean(trimmed)), half


def batch_mean_se(values: np.ndarray, n_batches: int = MIN_BATCHES) -> tuple[float, float]:
    """(mean, standard error) via batch means."""
    n = len(values)
    if n < 2 * n_batches:
        return float(np.mean(values)) if n else float("nan"), float("inf")
    per = n // n_batches
    trimmed = values[: per * n_batches]
    means = trimmed.reshape(n_batches, per).mean(axis=1)
    return float(np.mean(trimmed)), float(means.std(ddof=1) / np.sqrt(n_batches))


@dataclass(frozen=True)
class LittleCheck:
    """Mean number-in-system vs rate x mean-time-in-system over one window."""

    lam_eff: float
    mean_in_system: float
    mean_time_in_system: float

    @property
    def rel_error(self) -> float:
        expect = self.lam_eff * self.mean_time_in_system
        if expect == 0:
            return 0.0 if self.mean_in_system == 0 else float("inf")
        return abs(self.mean_in_system - expect) / expect


def little_check(arrivals: np.ndarray, completions: np.ndarray,
                 t0: float, t1: float) -> LittleCheck:
    """Little's-law data over the window [t0, t1].

    The time-average occupancy integrates every request's overlap with the
    window, the effective rate counts arrivals inside it, and the mean
    sojourn averages requests completing inside it; the three only agree up
    to edge effects, which is what makes the comparison a real check.
    """
    span = t1 - t0
    if span <= 0:
        return LittleCheck(0.0, 0.0, 0.0)
    overlap = np.minimum(completions, t1) - np.maximum(arrivals, t0)
    area = float(overlap[overlap > 0].sum())
    in_window = (arrivals > t0) & (arrivals <= t1)
    lam_eff = float(in_window.sum()) / span
    done = (completions > t0) & (completions <= t1)
    mean_t = float((completions[done] - arrivals[done]).mean()) if done.any() else 0.0
    return LittleCheck(lam_eff, area / span, mean_t)


@dataclass(frozen=True)
class TraceData:
    """Optional per-request record of one run (tagged stream only)."""

    station_names: tuple[str, ...]
    request_id: np.ndarray
    tenant_id: np.ndarray
    arrival_s: np.ndarray
    departure_s: np.ndarray
    path: str
    waits: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class SimReport:
    completions: int
    mean_latency: float
    latency_stddev: float
    mean_wait_per_station: tuple[float, ...]
    ci95_halfwidth: float
    wait_ci95_halfwidth: tuple[float, ...]
    station_names: tuple[str, ...]
    little: LittleCheck | None = None
    busy_fraction: tuple[float, ...] = ()
    per_request_trace: TraceData | None = None

    @property
    def mean_wait(self) -> float:
        """Wait at the single station of a one-station run."""
        if len(self.mean_wait_per_station) != 1:
            raise ValueError("mean_wait is only defined for single-station runs")
        return self.mean_wait_per_station[0]


def trace_to_csv(trace: TraceData) -> str:
    """Per-request trace as CSV text."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["request_id", "tenant_id", "arrival_s", "departure_s", "path"]
    header += [f"wait_{name}_s" for name in trace.station_names]
    writer.writerow(header)
    for i in range(len(trace.request_id)):
        row = [int(trace.request_id[i]), int(trace.tenant_id[i]),
               format(trace.arrival_s[i], ".12g"), format(trace.departure_s[i], ".12g"),
               trace.path]
        row += [format(w[i], ".12g") for w in trace.waits]
        writer.writerow(row)
    return out.getvalue()
