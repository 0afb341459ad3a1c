"""Resource guardrails shared by the iterative computations.

Limits are carried in a context variable so that pure functions can check
them without threading a parameter through every call.
"""

from __future__ import annotations

import contextlib
import contextvars
import time
from dataclasses import dataclass, replace

DEFAULT_DEGREE_CAP = 20000
DEFAULT_NODE_CAP = 100000


class ResourceLimitExceeded(RuntimeError):
    def __init__(self, resource: str, limit, observed=None):
        self.resource = resource
        self.limit = limit
        self.observed = observed
        msg = f"{resource} limit {limit} exceeded"
        if observed is not None:
            msg += f" (observed {observed})"
        super().__init__(msg)


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; ``invariant`` names it."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"invariant violated: {invariant}" + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class Limits:
    degree_cap: int = DEFAULT_DEGREE_CAP
    node_cap: int = DEFAULT_NODE_CAP
    time_budget: float | None = None
    deadline: float | None = None


_current: contextvars.ContextVar[Limits] = contextvars.ContextVar("isocurve_limits", default=Limits())


def current() -> Limits:
    return _current.get()


@contextlib.contextmanager
def limits(degree_cap: int | None = None, node_cap: int | None = None, time_budget: float | None = None):
    base = _current.get()
    new = base
    if degree_cap is not None:
        new = replace(new, degree_cap=int(degree_cap))
    if node_cap is not None:
        new = replace(new, node_cap=int(node_cap))
    if time_budget is not None:
        new = replace(new, time_budget=float(time_budget), deadline=time.monotonic() + float(time_budget))
    token = _current.set(new)
    try:
        yield new
    finally:
        _current.reset(token)


def check_degree(degree: int, cap: int | None = None) -> None:
    cap = current().degree_cap if cap is None else cap
    if degree > cap:
        raise ResourceLimitExceeded("degree", cap, degree)
    check_time()


def check_time() -> None:
    lim = current()
    if lim.deadline is not None and time.monotonic() > lim.deadline:
        raise ResourceLimitExceeded("time", lim.time_budget)
