"""Test case prioritization: static schedulers combined with a dynamic
conditional-probability rescheduler, replayed against recorded CI verdicts."""

from .core import (
    CycleLog,
    Dataset,
    Outcome,
    Schedule,
    VerdictRecord,
    classify_verdict,
    is_evaluable,
    normalize_cycle,
)
from .correlation import (
    CorrelationTable,
    WindowConfig,
    build_tables,
    lookup_fail,
    lookup_pass,
)
from .dynamic_cp import (
    CpConfig,
    ExecutionTrace,
    ScoreBoard,
    apply_verdict,
    next_test,
    run_dynamic,
)
from .ingest import (
    DatasetStats,
    dataset_stats,
    parse_canonical,
    parse_industrial,
    serialize_canonical,
)
from .metrics import apfd
from .replay import (
    ReplayConfig,
    ReplayReport,
    evaluated_cycles,
    replay,
    replay_cycle,
    summarize,
)
from .schedulers import (
    StaticKind,
    init_scores,
    schedule_external,
    schedule_optimal,
    schedule_random,
    schedule_worst,
)
from .synth import GroupSpec, SynthConfig, generate, uniform_groups

__version__ = "0.1.0"
