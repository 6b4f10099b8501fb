"""Exception types shared across the package."""

from __future__ import annotations


class EdgeqError(Exception):
    """Base class for all edgeq errors."""


class UnstableError(EdgeqError):
    """A queue has no steady state (utilization at or above 1).

    ``stage`` names the saturating queue when known (e.g. "request NIC",
    "edge processor").
    """

    def __init__(self, stage: str | None = None, lam: float | None = None,
                 mu_eff: float | None = None):
        self.stage = stage
        self.lam = lam
        self.mu_eff = mu_eff
        where = stage or "queue"
        detail = ""
        if lam is not None and mu_eff is not None:
            detail = f" (lambda={lam:g} /s, effective service rate={mu_eff:g} /s)"
        super().__init__(f"{where} is saturated; no steady state{detail}")


class WrongDistributionError(EdgeqError):
    """A formula was applied to a service distribution it does not model."""


class InconsistentRateError(EdgeqError):
    """Arrival rate and interarrival mean disagree."""


class MultiTenantError(EdgeqError):
    """A single-tenant result was requested for a multi-tenant edge."""


class EmptyFeasibleRangeError(EdgeqError):
    """No point of a sweep range is stable for either strategy."""


class DegenerateFitError(EdgeqError):
    """Observations do not constrain the fitted parameter."""


class AllUnstableError(EdgeqError):
    """No execution strategy is feasible for the given load."""


class ScriptError(EdgeqError):
    """A scenario script is malformed (unsorted, negative, bad index)."""


class ConfigError(EdgeqError):
    """A configuration file failed to parse or validate.

    ``key`` carries the offending key path when known.
    """

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)
