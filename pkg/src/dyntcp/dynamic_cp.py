"""Dynamic rescheduling from conditional co-failure / co-pass probabilities.

Tests run one at a time. After each verdict, every pending test correlated
with the executed one has its score raised (on a fault) or lowered (on a
pass) by ``k`` times the relevant conditional probability, and the pending
test with the highest score runs next.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .core import (
    ConfigError,
    CycleLog,
    DataIntegrityError,
    DyntcpError,
    Outcome,
    Schedule,
    TestId,
)
from .correlation import CorrelationTable

DEFAULT_K = 0.8


class ExhaustedError(DyntcpError, LookupError):
    """No pending tests remain."""


class ContractError(DyntcpError, ValueError):
    pass


@dataclass(frozen=True, slots=True)
class CpConfig:
    k: float = DEFAULT_K

    def __post_init__(self) -> None:
        if not math.isfinite(self.k) or self.k < 0:
            raise ConfigError(f"k must be a finite non-negative number, got {self.k}")


@dataclass(frozen=True, slots=True)
class ExecutionTrace:
    steps: tuple[tuple[TestId, Outcome], ...]

    @property
    def tests(self) -> tuple[TestId, ...]:
        return tuple(t for t, _ in self.steps)

    @property
    def outcomes(self) -> tuple[Outcome, ...]:
        return tuple(o for _, o in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


class ScoreBoard:
    """Scores of one cycle's tests, indexed by static schedule position.

    Position doubles as the tie-break: among equal scores the test scheduled
    earlier statically wins.
    """

    def __init__(self, order: Sequence[TestId], scores: Sequence[float] | None = None) -> None:
        self.order = tuple(order)
        self.position = {t: i for i, t in enumerate(self.order)}
        if len(self.position) != len(self.order):
            raise ContractError("duplicate test in score board")
        if scores is None:
            values = 1.0 / np.arange(1, len(self.order) + 1)
        else:
            values = np.array(scores, dtype=float)
            if values.shape != (len(self.order),):
                raise ContractError("one score per test required")
        self._scores = values
        self._pending = np.ones(len(self.order), dtype=bool)
        self.executed: list[tuple[TestId, Outcome]] = []
        self._bound: tuple[CorrelationTable, np.ndarray, np.ndarray] | None = None

    @property
    def pending(self) -> tuple[TestId, ...]:
        return tuple(t for t, p in zip(self.order, self._pending) if p)

    @property
    def scores(self) -> dict[TestId, float]:
        return {t: float(s) for t, s, p in zip(self.order, self._scores, self._pending) if p}

    def score(self, test: TestId) -> float:
        return float(self._scores[self.position[test]])

    def is_pending(self, test: TestId) -> bool:
        return bool(self._pending[self.position[test]])

    def mark_executed(self, test: TestId, outcome: Outcome) -> None:
        i = self.position.get(test)
        if i is None or not self._pending[i]:
            raise ContractError(f"{test!r} is not pending")
        self._pending[i] = False
        self.executed.append((test, outcome))

    def _matrices(self, table: CorrelationTable) -> tuple[np.ndarray, np.ndarray]:
        if self._bound is None or self._bound[0] is not table:
            fail, pas = table.submatrices(self.order)
            self._bound = (table, fail, pas)
        return self._bound[1], self._bound[2]

    def _update(self, executed: TestId, outcome: Outcome, table: CorrelationTable, k: float) -> np.ndarray:
        j = self.position.get(executed)
        if j is None:
            raise ContractError(f"{executed!r} is not on this board")
        if self._pending[j]:
            raise ContractError(f"{executed!r} must be marked executed before applying its verdict")
        fail, pas = self._matrices(table)
        if outcome is Outcome.FAULT:
            delta = k * fail[:, j]
        elif outcome is Outcome.PASS:
            delta = -k * pas[:, j]
        else:
            raise ContractError("excluded tests are never executed")
        delta = np.where(self._pending, delta, 0.0)
        self._scores = self._scores + delta
        return delta


def apply_verdict(
    board: ScoreBoard,
    executed: TestId,
    outcome: Outcome,
    table: CorrelationTable,
    cfg: CpConfig = CpConfig(),
) -> ScoreBoard:
    board._update(executed, outcome, table, cfg.k)
    return board


def next_test(board: ScoreBoard) -> TestId:
    if not board._pending.any():
        raise ExhaustedError("no pending tests")
    masked = np.where(board._pending, board._scores, -np.inf)
    # argmax returns the first maximum, i.e. the earliest static position
    return board.order[int(np.argmax(masked))]


def run_dynamic(
    static: Schedule,
    oracle: CycleLog,
    table: CorrelationTable,
    cfg: CpConfig = CpConfig(),
    *,
    board: ScoreBoard | None = None,
    step_log: TextIO | None = None,
) -> ExecutionTrace:
    """Execute ``static`` against recorded outcomes, rescheduling after each verdict.

    The first test is always the static scheduler's top choice. ``step_log``
    receives one JSON object per executed test.
    """
    expected = set(oracle.schedulable)
    if set(static.order) != expected:
        missing = sorted(expected - set(static.order))
        extra = sorted(set(static.order) - expected)
        raise DataIntegrityError(
            f"schedule does not cover cycle {oracle.cycle}: missing={missing} extra={extra}"
        )
    if board is None:
        board = ScoreBoard(static.order)

    step = 0
    test = static.order[0] if static.order else None
    while test is not None:
        outcome = oracle.outcomes.get(test)
        if outcome is None or outcome is Outcome.EXCLUDED:
            raise DataIntegrityError(f"no usable outcome for {test!r} in cycle {oracle.cycle}")
        board.mark_executed(test, outcome)
        delta = board._update(test, outcome, table, cfg.k)
        if step_log is not None:
            changed = {board.order[i]: float(delta[i]) for i in np.nonzero(delta)[0]}
            step_log.write(
                json.dumps(
                    {
                        "cycle": oracle.cycle,
                        "step": step,
                        "test": test,
                        "outcome": outcome.value,
                        "deltas": changed,
                    }
                )
                + "\n"
            )
        step += 1
        test = next_test(board) if board._pending.any() else None
    return ExecutionTrace(tuple(board.executed))
