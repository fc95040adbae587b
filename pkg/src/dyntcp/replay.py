"""Replay recorded CI cycles through static (and optionally dynamic) schedulers
and collect per-cycle APFD."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import TextIO

import numpy as np

from .core import ConfigError, CycleId, Dataset, EmptyInputError, TestId, is_evaluable
from .correlation import DEFAULT_HISTORY, CorrelationTable, WindowConfig, build_tables
from .dynamic_cp import DEFAULT_K, CpConfig, run_dynamic
from .metrics import apfd
from .schedulers import StaticKind, make_static

log = logging.getLogger(__name__)

DEFAULT_REPETITIONS = 30
DEFAULT_CYCLE_LIMIT = 300
REPORT_HEADER = ("cycle", "config", "repetition", "apfd")


@dataclass(frozen=True)
class ReplayConfig:
    static_kind: StaticKind = StaticKind.WORST
    dynamic_enabled: bool = True
    history_length: int = DEFAULT_HISTORY
    k: float = DEFAULT_K
    repetitions: int = DEFAULT_REPETITIONS
    master_seed: int = 0
    cycle_limit: int = DEFAULT_CYCLE_LIMIT
    # per-cycle scores, required when static_kind is EXTERNAL
    external_scores: Mapping[CycleId, Mapping[TestId, float]] | None = field(
        default=None, repr=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "static_kind", StaticKind(self.static_kind))
        if self.history_length < 1:
            raise ConfigError("history_length must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.cycle_limit < 1:
            raise ConfigError("cycle_limit must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be >= 0")
        CpConfig(self.k)
        if self.static_kind is StaticKind.EXTERNAL and self.external_scores is None:
            raise ConfigError("external static scheduling needs per-cycle scores")

    @property
    def static_label(self) -> str:
        return self.static_kind.value

    @property
    def dynamic_label(self) -> str:
        return f"{self.static_kind.value}+cp"


@dataclass(frozen=True, slots=True)
class ReplayRow:
    cycle: CycleId
    config: str
    repetition: int
    apfd: float


@dataclass
class ReplayReport:
    rows: list[ReplayRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def extend(self, other: ReplayReport) -> None:
        self.rows.extend(other.rows)

    def to_csv(self) -> str:
        out = io.StringIO()
        write_report_csv(self, out)
        return out.getvalue()


@dataclass(frozen=True, slots=True)
class SummaryStats:
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def derive_seed(master_seed: int, cycle: CycleId, repetition: int) -> int:
    """64-bit seed for one random repetition, independent of evaluation order."""
    ss = np.random.SeedSequence([master_seed, cycle, repetition])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def evaluated_cycles(d: Dataset, cfg: ReplayConfig) -> list[CycleId]:
    """The last ``cycle_limit`` cycles that contain both a fault and a pass."""
    chosen = [c.cycle for c in d.cycles[-cfg.cycle_limit :] if is_evaluable(c)]
    if not chosen:
        log.warning("no evaluable cycles among the last %d", cfg.cycle_limit)
    return chosen


def replay_cycle(
    d: Dataset,
    cycle: CycleId,
    cfg: ReplayConfig,
    *,
    step_log: TextIO | None = None,
) -> list[ReplayRow]:
    i = d.index_of(cycle)
    oracle = d.cycles[i]
    table = CorrelationTable.empty()
    if cfg.dynamic_enabled:
        # only strictly earlier cycles are visible to the window
        table = build_tables(d.cycles[:i], cycle, WindowConfig(cfg.history_length))
    cp = CpConfig(cfg.k)

    reps = range(cfg.repetitions) if cfg.static_kind is StaticKind.RANDOM else (0,)
    scores = cfg.external_scores.get(cycle) if cfg.external_scores is not None else None
    rows = []
    for rep in reps:
        static = make_static(
            cfg.static_kind,
            oracle,
            seed=derive_seed(cfg.master_seed, cycle, rep),
            scores=scores,
        )
        static_outcomes = [oracle.outcomes[t] for t in static.order]
        rows.append(ReplayRow(cycle, cfg.static_label, rep, apfd(static_outcomes)))
        if cfg.dynamic_enabled:
            trace = run_dynamic(static, oracle, table, cp, step_log=step_log)
            rows.append(ReplayRow(cycle, cfg.dynamic_label, rep, apfd(trace)))
    return rows


def replay(
    d: Dataset,
    cfg: ReplayConfig,
    *,
    workers: int = 1,
    step_log: TextIO | None = None,
) -> ReplayReport:
    """Replay every evaluated cycle; rows come back in ascending cycle order."""
    cycles = evaluated_cycles(d, cfg)
    if workers > 1 and step_log is None and len(cycles) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(partial(replay_cycle, d, cfg=cfg), cycles, chunksize=8)
            per_cycle = list(chunks)
    else:
        per_cycle = [replay_cycle(d, c, cfg, step_log=step_log) for c in cycles]
    return ReplayReport([row for rows in per_cycle for row in rows])


def summarize(report: ReplayReport | Sequence[ReplayRow]) -> dict[str, SummaryStats]:
    """Distribution of per-cycle APFD per configuration.

    Repetitions of the same cycle are averaged first, so every cycle weighs
    the same regardless of how many random draws it had.
    """
    rows = report.rows if isinstance(report, ReplayReport) else list(report)
    if not rows:
        raise EmptyInputError("nothing to summarize")
    per_config: dict[str, dict[CycleId, list[float]]] = {}
    for r in rows:
        per_config.setdefault(r.config, {}).setdefault(r.cycle, []).append(r.apfd)
    out = {}
    for config, cycles in per_config.items():
        values = np.array([np.mean(v) for v in cycles.values()])
        q1, median, q3 = np.percentile(values, [25, 50, 75])
        out[config] = SummaryStats(
            min=float(values.min()),
            q1=float(q1),
            median=float(median),
            mean=float(values.mean()),
            q3=float(q3),
            max=float(values.max()),
        )
    return out


def write_report_csv(report: ReplayReport, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for r in report.rows:
        writer.writerow((r.cycle, r.config, r.repetition, repr(r.apfd)))


def read_report_csv(stream: TextIO) -> ReplayReport:
    reader = csv.DictReader(stream)
    return ReplayReport(
        [
            ReplayRow(int(row["cycle"]), row["config"], int(row["repetition"]), float(row["apfd"]))
            for row in reader
        ]
    )
