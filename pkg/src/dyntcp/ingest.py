"""Dataset readers (canonical CSV and semicolon-separated industrial logs) and
summary statistics."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from typing import TextIO

from .core import (
    RAW_VERDICTS,
    Dataset,
    EmptyInputError,
    FormatError,
    Outcome,
    VerdictRecord,
    classify_verdict,
)

CANONICAL_HEADER = ("test_id", "cycle", "verdict")

# column names used by the public ABB Robotics datasets (Paint Control, IOF/ROL)
INDUSTRIAL_COLUMNS = {"test": "Name", "cycle": "Cycle", "verdict": "Verdict"}


@dataclass(frozen=True, slots=True)
class DatasetStats:
    distinct_tests: int
    cycles: int
    verdict_count: int
    failed_fraction: float

    def to_dict(self) -> dict:
        return asdict(self)


def _as_stream(stream: TextIO | str) -> TextIO:
    return io.StringIO(stream) if isinstance(stream, str) else stream


def _parse_int(value: str, column: str, line: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise FormatError(f"non-integer {column} {value!r}", line) from None


def _read_records(
    stream: TextIO | str,
    *,
    test_col: str,
    cycle_col: str,
    verdict_col: str,
    delimiter: str,
    allowed: frozenset[int] | None,
    require_header: tuple[str, ...] | None = None,
) -> list[VerdictRecord]:
    reader = csv.reader(_as_stream(stream), delimiter=delimiter)
    header = None
    for header in reader:
        if any(cell.strip() for cell in header):
            break
    else:
        return []
    header = [h.strip().lstrip("﻿") for h in header]
    if require_header is not None and tuple(header) != require_header:
        raise FormatError(f"expected header {','.join(require_header)!r}, got {header!r}", 1)
    try:
        ti, ci, vi = (header.index(c) for c in (test_col, cycle_col, verdict_col))
    except ValueError:
        missing = [c for c in (test_col, cycle_col, verdict_col) if c not in header]
        raise FormatError(f"missing column(s) {missing}", reader.line_num) from None
    width = max(ti, ci, vi) + 1

    records = []
    for row in reader:
        line = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) < width:
            raise FormatError(f"expected at least {width} columns, got {len(row)}", line)
        test = row[ti].strip()
        if not test:
            raise FormatError("empty test id", line)
        cycle = _parse_int(row[ci], "cycle", line)
        verdict = _parse_int(row[vi], "verdict", line)
        if allowed is not None and verdict not in allowed:
            raise FormatError(f"verdict {verdict} not allowed in this format", line)
        if verdict not in RAW_VERDICTS:
            raise FormatError(f"unknown verdict code {verdict}", line)
        if cycle < 0:
            raise FormatError(f"negative cycle {cycle}", line)
        records.append(VerdictRecord(test, cycle, verdict, len(records)))
    return records


def parse_canonical(stream: TextIO | str) -> Dataset:
    """Read ``test_id,cycle,verdict`` rows listed in execution order."""
    records = _read_records(
        stream,
        test_col="test_id",
        cycle_col="cycle",
        verdict_col="verdict",
        delimiter=",",
        allowed=None,
        require_header=CANONICAL_HEADER,
    )
    return Dataset.from_records(records)


def parse_industrial(
    stream: TextIO | str,
    *,
    test_col: str = INDUSTRIAL_COLUMNS["test"],
    cycle_col: str = INDUSTRIAL_COLUMNS["cycle"],
    verdict_col: str = INDUSTRIAL_COLUMNS["verdict"],
    delimiter: str = ";",
) -> Dataset:
    """Read a delimited file with a named header and pass/fail (0/1) verdicts.

    Extra columns are ignored. Repeated executions of a test within a cycle
    are resolved in favour of the last row.
    """
    records = _read_records(
        stream,
        test_col=test_col,
        cycle_col=cycle_col,
        verdict_col=verdict_col,
        delimiter=delimiter,
        allowed=frozenset({0, 1}),
    )
    return Dataset.from_records(records)


def serialize_canonical(d: Dataset) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CANONICAL_HEADER)
    for log in d.cycles:
        for test, outcome in log.outcomes.items():
            writer.writerow((test, log.cycle, outcome.raw))
    return out.getvalue()


def dataset_stats(d: Dataset, *, raw: bool = False) -> DatasetStats:
    """Counts of tests, cycles and verdicts plus the fraction of failures.

    With ``raw=True`` the counts are taken over the records the dataset was
    parsed from, before keeping only each test's last verdict per cycle.
    """
    if not d.cycles:
        raise EmptyInputError("dataset has no cycles")
    if raw:
        if not d.raw_records:
            raise EmptyInputError("dataset carries no raw records")
        outcomes = [classify_verdict(r.raw) for r in d.raw_records]
    else:
        outcomes = [o for log in d.cycles for o in log.outcomes.values()]
    faults = sum(o is Outcome.FAULT for o in outcomes)
    passes = sum(o is Outcome.PASS for o in outcomes)
    considered = faults + passes
    return DatasetStats(
        distinct_tests=len(d.universe),
        cycles=len(d.cycles),
        verdict_count=len(outcomes),
        failed_fraction=faults / considered if considered else 0.0,
    )
