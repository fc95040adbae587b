"""APFD under the one-unique-fault-per-failing-test assumption."""

from __future__ import annotations

from collections.abc import Iterable

from .core import DyntcpError, Outcome
from .dynamic_cp import ExecutionTrace


class UndefinedMetricError(DyntcpError, ValueError):
    pass


def apfd(trace: ExecutionTrace | Iterable[Outcome]) -> float:
    """Average Percentage of Faults Detected.

    ``1 - sum(TF) / (n * m) + 1 / (2n)`` where TF are the 1-based positions of
    the failing tests, n the number of executed tests and m the number of
    failing ones. Excluded outcomes are dropped before counting.
    """
    outcomes = trace.outcomes if isinstance(trace, ExecutionTrace) else trace
    n = 0
    m = 0
    positions = 0
    for o in outcomes:
        if o is Outcome.EXCLUDED:
            continue
        n += 1
        if o is Outcome.FAULT:
            m += 1
            positions += n
    if m == 0:
        raise UndefinedMetricError("APFD is undefined without faults")
    return 1.0 - positions / (n * m) + 1.0 / (2 * n)
