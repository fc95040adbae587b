"""Static schedulers: Optimal, Worst, seeded Random and external scores."""

from __future__ import annotations

import enum
from collections.abc import Mapping

import numpy as np

from .core import (
    ConfigError,
    CycleLog,
    MalformedInputError,
    NotEvaluableError,
    Schedule,
    TestId,
    is_evaluable,
)
from .dynamic_cp import ScoreBoard

__all__ = [
    "Schedule",
    "StaticKind",
    "init_scores",
    "make_static",
    "schedule_external",
    "schedule_optimal",
    "schedule_random",
    "schedule_worst",
]


class StaticKind(str, enum.Enum):
    OPTIMAL = "optimal"
    WORST = "worst"
    RANDOM = "random"
    EXTERNAL = "external"


def _require_evaluable(log: CycleLog) -> None:
    if not is_evaluable(log):
        raise NotEvaluableError(f"cycle {log.cycle} needs at least one failing and one passing test")


def schedule_optimal(log: CycleLog) -> Schedule:
    """All failing tests first, then the passing ones, each in dataset order."""
    _require_evaluable(log)
    return Schedule(log.faults + log.passes)


def schedule_worst(log: CycleLog) -> Schedule:
    _require_evaluable(log)
    return Schedule(log.passes + log.faults)


def schedule_random(log: CycleLog, seed: int) -> Schedule:
    """Uniform random permutation drawn from a PCG64 generator seeded with ``seed``.

    Only non-emptiness is required; single-test cycles are accepted.
    """
    tests = log.schedulable
    if not tests:
        raise NotEvaluableError(f"cycle {log.cycle} has no schedulable tests")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(len(tests))
    return Schedule(tuple(tests[i] for i in perm))


def schedule_external(log: CycleLog, scores: Mapping[TestId, float]) -> Schedule:
    """Order by descending externally supplied score, ties in dataset order."""
    tests = log.schedulable
    missing = [t for t in tests if t not in scores]
    if missing:
        raise MalformedInputError(f"no score for {missing[:5]} in cycle {log.cycle}")
    ranked = sorted(range(len(tests)), key=lambda i: (-float(scores[tests[i]]), i))
    return Schedule(tuple(tests[i] for i in ranked))


def make_static(
    kind: StaticKind | str,
    log: CycleLog,
    *,
    seed: int | None = None,
    scores: Mapping[TestId, float] | None = None,
) -> Schedule:
    kind = StaticKind(kind)
    if kind is StaticKind.OPTIMAL:
        return schedule_optimal(log)
    if kind is StaticKind.WORST:
        return schedule_worst(log)
    if kind is StaticKind.RANDOM:
        if seed is None:
            raise ConfigError("random scheduling needs a seed")
        return schedule_random(log, seed)
    if scores is None:
        raise ConfigError("external scheduling needs scores")
    return schedule_external(log, scores)


def init_scores(s: Schedule) -> ScoreBoard:
    """Score each test by the reciprocal of its 1-based schedule position."""
    if not s.order:
        raise MalformedInputError("cannot score an empty schedule")
    return ScoreBoard(s.order)

