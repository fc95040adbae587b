"""Pairwise conditional co-failure / co-pass probabilities over a history window."""

from __future__ import annotations

import csv
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .core import ConfigError, CycleId, CycleLog, DataIntegrityError, Outcome, TestId

DEFAULT_HISTORY = 15


@dataclass(frozen=True, slots=True)
class WindowConfig:
    history_length: int = DEFAULT_HISTORY

    def __post_init__(self) -> None:
        if self.history_length < 1:
            raise ConfigError("history_length must be >= 1")


class CorrelationTable:
    """Dense conditional probability matrices over the tests seen in a window.

    ``fail[i, j]`` holds P(test i fails | test j fails) and ``pas[i, j]``
    P(test i passes | test j passes), i.e. rows are the pending (predicted)
    test and columns the executed (observed) one. A zero cell means the pair
    has no stored entry: either the conditioning event never occurred or the
    two tests never co-occurred in that state.
    """

    __slots__ = ("tests", "index", "fail", "pas", "window")

    def __init__(
        self,
        tests: Sequence[TestId],
        fail: np.ndarray,
        pas: np.ndarray,
        window: tuple[CycleId, ...] = (),
    ) -> None:
        self.tests = tuple(tests)
        self.index = {t: i for i, t in enumerate(self.tests)}
        self.fail = fail
        self.pas = pas
        self.window = window
        for m in (fail, pas):
            m.setflags(write=False)

    @classmethod
    def empty(cls) -> CorrelationTable:
        z = np.zeros((0, 0))
        return cls((), z, z.copy())

    def __len__(self) -> int:
        return int(np.count_nonzero(self.fail) + np.count_nonzero(self.pas))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CorrelationTable):
            return NotImplemented
        return (
            self.tests == other.tests
            and np.array_equal(self.fail, other.fail)
            and np.array_equal(self.pas, other.pas)
        )

    def submatrices(self, order: Sequence[TestId]) -> tuple[np.ndarray, np.ndarray]:
        """Fail/pass matrices re-indexed to ``order``; unknown tests get zeros."""
        n = len(order)
        fail = np.zeros((n, n))
        pas = np.zeros((n, n))
        pos = [(k, self.index[t]) for k, t in enumerate(order) if t in self.index]
        if pos:
            local, glob = (np.array(x) for x in zip(*pos))
            fail[np.ix_(local, local)] = self.fail[np.ix_(glob, glob)]
            pas[np.ix_(local, local)] = self.pas[np.ix_(glob, glob)]
        return fail, pas

    def entries(self, direction: str = "fail") -> Iterator[tuple[TestId, TestId, float]]:
        m = self.fail if direction == "fail" else self.pas
        for i, j in zip(*np.nonzero(m)):
            yield self.tests[i], self.tests[j], float(m[i, j])


def _lookup(m: np.ndarray, table: CorrelationTable, pending: TestId, executed: TestId) -> float | None:
    i = table.index.get(pending)
    j = table.index.get(executed)
    if i is None or j is None:
        return None
    p = m[i, j]
    return float(p) if p > 0 else None


def lookup_fail(table: CorrelationTable, pending: TestId, executed: TestId) -> float | None:
    return _lookup(table.fail, table, pending, executed)


def lookup_pass(table: CorrelationTable, pending: TestId, executed: TestId) -> float | None:
    return _lookup(table.pas, table, pending, executed)


def select_window(
    history: Sequence[CycleLog], target_cycle: CycleId, history_length: int
) -> Sequence[CycleLog]:
    prev = None
    for log in history:
        if log.cycle >= target_cycle:
            raise DataIntegrityError(
                f"history cycle {log.cycle} is not before target cycle {target_cycle}"
            )
        if prev is not None and log.cycle <= prev:
            raise DataIntegrityError("history must be in ascending cycle order")
        prev = log.cycle
    return history[-history_length:] if history_length < len(history) else history


def build_tables(
    history: Sequence[CycleLog],
    target_cycle: CycleId,
    cfg: WindowConfig = WindowConfig(),
) -> CorrelationTable:
    """Estimate conditional probabilities from the cycles just before ``target_cycle``.

    Only cycles in which both tests of a pair have a pass or fault outcome
    count towards that pair. Entries are kept only when the estimate is
    strictly positive.
    """
    window = select_window(history, target_cycle, cfg.history_length)
    tests: dict[TestId, int] = {}
    for log in window:
        for t, o in log.outcomes.items():
            if o is not Outcome.EXCLUDED:
                tests.setdefault(t, len(tests))
    if not tests:
        return CorrelationTable.empty()

    shape = (len(window), len(tests))
    fault = np.zeros(shape)
    passed = np.zeros(shape)
    for c, log in enumerate(window):
        for t, o in log.outcomes.items():
            if o is Outcome.FAULT:
                fault[c, tests[t]] = 1.0
            elif o is Outcome.PASS:
                passed[c, tests[t]] = 1.0
    present = fault + passed

    fail = _conditional(fault, present)
    pas = _conditional(passed, present)
    return CorrelationTable(list(tests), fail, pas, tuple(log.cycle for log in window))


def _conditional(event: np.ndarray, present: np.ndarray) -> np.ndarray:
    # joint[i, j]: cycles with both events; cond[i, j]: cycles with j's event and i present
    joint = event.T @ event
    cond = present.T @ event
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(cond > 0, joint / cond, 0.0)
    np.fill_diagonal(p, 0.0)
    return p


def dump_table(table: CorrelationTable, out: TextIO) -> None:
    """Write ``pending,executed,direction,probability`` rows for inspection."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("pending", "executed", "direction", "probability"))
    for direction in ("fail", "pass"):
        for pending, executed, p in table.entries(direction):
            writer.writerow((pending, executed, direction, repr(p)))
