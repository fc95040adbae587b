"""Domain types shared by every stage: verdicts, cycles, datasets, schedules."""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

TestId = str
CycleId = int

RAW_VERDICTS = frozenset({0, 1, 2, 3})


class DyntcpError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(DyntcpError, ValueError):
    """Input text could not be parsed."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedInputError(DyntcpError, ValueError):
    """Records are well-formed individually but inconsistent as a group."""


class EmptyInputError(DyntcpError, ValueError):
    pass


class NotEvaluableError(DyntcpError, ValueError):
    """Cycle lacks either a failing or a passing test."""


class DataIntegrityError(DyntcpError, ValueError):
    pass


class ConfigError(DyntcpError, ValueError):
    pass


class Outcome(enum.Enum):
    PASS = "pass"
    FAULT = "fault"
    EXCLUDED = "excluded"

    @property
    def raw(self) -> int:
        """Canonical raw code used when serializing (invalid collapses to fail)."""
        return _OUTCOME_RAW[self]


_RAW_OUTCOME = {0: Outcome.PASS, 1: Outcome.FAULT, 2: Outcome.FAULT, 3: Outcome.EXCLUDED}
_OUTCOME_RAW = {Outcome.PASS: 0, Outcome.FAULT: 1, Outcome.EXCLUDED: 3}


def classify_verdict(raw: int, *, where: str | None = None) -> Outcome:
    """Map a raw verdict code to its outcome class.

    0 is a pass, 1 (fail) and 2 (invalid) are faults, 3 (resource unavailable)
    is excluded from both correlation and evaluation.
    """
    try:
        return _RAW_OUTCOME[raw]
    except (KeyError, TypeError):
        ctx = f" in {where}" if where else ""
        raise FormatError(f"unknown verdict code {raw!r}{ctx}") from None


@dataclass(frozen=True, slots=True)
class VerdictRecord:
    test: TestId
    cycle: CycleId
    raw: int
    sequence: int

    def __post_init__(self) -> None:
        if not self.test:
            raise MalformedInputError("test id must be non-empty")
        if self.sequence < 0:
            raise MalformedInputError("sequence must be >= 0")


@dataclass(frozen=True)
class CycleLog:
    """Normalized outcomes of one CI cycle, at most one per test.

    ``outcomes`` keeps insertion order; that order is the dataset order used
    wherever a stable tie-break is needed. Treat it as read-only.
    """

    cycle: CycleId
    outcomes: Mapping[TestId, Outcome]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", dict(self.outcomes))

    @property
    def schedulable(self) -> tuple[TestId, ...]:
        return tuple(t for t, o in self.outcomes.items() if o is not Outcome.EXCLUDED)

    @property
    def faults(self) -> tuple[TestId, ...]:
        return tuple(t for t, o in self.outcomes.items() if o is Outcome.FAULT)

    @property
    def passes(self) -> tuple[TestId, ...]:
        return tuple(t for t, o in self.outcomes.items() if o is Outcome.PASS)

    def to_records(self, start: int = 0) -> list[VerdictRecord]:
        return [
            VerdictRecord(t, self.cycle, o.raw, start + i)
            for i, (t, o) in enumerate(self.outcomes.items())
        ]


@dataclass(frozen=True)
class Dataset:
    """Time-ordered cycle logs.

    ``raw_records`` optionally retains the pre-dedup records the dataset was
    built from so raw statistics can be reported; it does not take part in
    equality.
    """

    cycles: tuple[CycleLog, ...]
    raw_records: tuple[VerdictRecord, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cycles", tuple(self.cycles))
        ids = [c.cycle for c in self.cycles]
        if any(a >= b for a, b in zip(ids, ids[1:])):
            raise MalformedInputError("cycle indices must be strictly increasing")

    @property
    def universe(self) -> frozenset[TestId]:
        return frozenset(t for c in self.cycles for t in c.outcomes)

    def __len__(self) -> int:
        return len(self.cycles)

    def index_of(self, cycle: CycleId) -> int:
        for i, c in enumerate(self.cycles):
            if c.cycle == cycle:
                return i
        raise KeyError(cycle)

    @classmethod
    def from_records(cls, records: Iterable[VerdictRecord]) -> Dataset:
        records = tuple(records)
        by_cycle: dict[CycleId, list[VerdictRecord]] = {}
        for r in records:
            by_cycle.setdefault(r.cycle, []).append(r)
        logs = tuple(normalize_cycle(by_cycle[c]) for c in sorted(by_cycle))
        return cls(logs, raw_records=records)


@dataclass(frozen=True, slots=True)
class Schedule:
    """A static test order; position 0 runs first."""

    order: tuple[TestId, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", tuple(self.order))
        if len(set(self.order)) != len(self.order):
            raise MalformedInputError("schedule contains duplicate tests")

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)


def normalize_cycle(records: Sequence[VerdictRecord]) -> CycleLog:
    """Collapse one cycle's records so only each test's last verdict survives."""
    if not records:
        raise MalformedInputError("cannot normalize an empty record set")
    cycle = records[0].cycle
    last: dict[TestId, VerdictRecord] = {}
    seen: set[tuple[TestId, int]] = set()
    for r in records:
        if r.cycle != cycle:
            raise MalformedInputError(f"mixed cycles {cycle} and {r.cycle} in one group")
        key = (r.test, r.sequence)
        if key in seen:
            raise MalformedInputError(
                f"duplicate sequence {r.sequence} for test {r.test!r} in cycle {cycle}"
            )
        seen.add(key)
        prev = last.get(r.test)
        if prev is None or r.sequence > prev.sequence:
            last[r.test] = r
    # order by first appearance so dataset order is stable across dedup
    first_seen: dict[TestId, None] = dict.fromkeys(r.test for r in records)
    outcomes = {
        t: classify_verdict(last[t].raw, where=f"test {t!r} cycle {cycle} seq {last[t].sequence}")
        for t in first_seen
    }
    return CycleLog(cycle, outcomes)


def is_evaluable(log: CycleLog) -> bool:
    values = set(log.outcomes.values())
    return Outcome.FAULT in values and Outcome.PASS in values
