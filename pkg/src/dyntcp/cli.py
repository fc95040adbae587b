"""Command-line entry point.

Exit codes:
    0  success
    1  input could not be read or parsed
    2  invalid configuration or empty input
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from .core import (
    ConfigError,
    DataIntegrityError,
    Dataset,
    EmptyInputError,
    FormatError,
    MalformedInputError,
)
from .correlation import DEFAULT_HISTORY, WindowConfig, build_tables, dump_table
from .dynamic_cp import DEFAULT_K
from .ingest import (
    INDUSTRIAL_COLUMNS,
    dataset_stats,
    parse_canonical,
    parse_industrial,
    serialize_canonical,
)
from .replay import (
    DEFAULT_CYCLE_LIMIT,
    DEFAULT_REPETITIONS,
    ReplayConfig,
    ReplayReport,
    replay,
    summarize,
)
from .schedulers import StaticKind
from .synth import SynthConfig, generate, uniform_groups

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CONFIG = 2

log = logging.getLogger("dyntcp")

REPLAY_DEFAULTS: dict[str, Any] = {
    "format": "canonical",
    "col_test": INDUSTRIAL_COLUMNS["test"],
    "col_cycle": INDUSTRIAL_COLUMNS["cycle"],
    "col_verdict": INDUSTRIAL_COLUMNS["verdict"],
    "delimiter": None,
    "static": "optimal,random,worst",
    "dynamic": "cp",
    "history": DEFAULT_HISTORY,
    "k": DEFAULT_K,
    "reps": DEFAULT_REPETITIONS,
    "cycles": DEFAULT_CYCLE_LIMIT,
    "seed": 0,
    "workers": 1,
    "scores": None,
    "trace_log": None,
    "summary": None,
}

SYNTH_DEFAULTS: dict[str, Any] = {
    "tests": 50,
    "cycles": 300,
    "groups": "5x10",
    "group_rate": 0.3,
    "rho": 1.0,
    "background": 0.0,
    "flakiness": 0.0,
    "seed": 0,
}


class UsageError(ConfigError):
    pass


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a sibling temp file, then rename it over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve(args: argparse.Namespace, defaults: dict[str, Any]) -> dict[str, Any]:
    """Merge flags over an optional JSON config file over built-in defaults."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _load(path: str, opts: dict[str, Any]) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        if opts["format"] == "canonical":
            if opts.get("delimiter") not in (None, ","):
                raise UsageError("the canonical format is always comma-separated")
            return parse_canonical(fh)
        return parse_industrial(
            fh,
            test_col=opts["col_test"],
            cycle_col=opts["col_cycle"],
            verdict_col=opts["col_verdict"],
            delimiter=opts.get("delimiter") or ";",
        )


def _read_scores(path: str) -> dict[int, dict[str, float]]:
    scores: dict[int, dict[str, float]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"cycle", "test_id", "score"} <= set(reader.fieldnames):
            raise FormatError("scores file needs columns cycle,test_id,score", 1)
        for row in reader:
            try:
                scores.setdefault(int(row["cycle"]), {})[row["test_id"]] = float(row["score"])
            except (TypeError, ValueError):
                raise FormatError(f"bad score row {row}", reader.line_num) from None
    return scores


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="dataset file")
    p.add_argument("--format", choices=("canonical", "industrial"), help="default: canonical")
    p.add_argument("--col-test", dest="col_test", help="industrial test-name column (default: Name)")
    p.add_argument("--col-cycle", dest="col_cycle", help="industrial cycle column (default: Cycle)")
    p.add_argument("--col-verdict", dest="col_verdict", help="industrial verdict column (default: Verdict)")
    p.add_argument("--delimiter", help="industrial field delimiter (default: ;)")


def cmd_replay(args: argparse.Namespace) -> int:
    opts = _resolve(args, REPLAY_DEFAULTS)
    kinds = [s.strip() for s in str(opts["static"]).split(",") if s.strip()]
    try:
        kinds = [StaticKind(s) for s in kinds]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not kinds:
        raise UsageError("--static needs at least one scheduler")
    if opts["dynamic"] not in ("cp", "none"):
        raise UsageError("--dynamic must be 'cp' or 'none'")
    if opts["workers"] < 1:
        raise UsageError("--workers must be >= 1")
    scores = _read_scores(opts["scores"]) if opts["scores"] else None
    configs = [
        ReplayConfig(
            static_kind=kind,
            dynamic_enabled=opts["dynamic"] == "cp",
            history_length=int(opts["history"]),
            k=float(opts["k"]),
            repetitions=int(opts["reps"]),
            master_seed=int(opts["seed"]),
            cycle_limit=int(opts["cycles"]),
            external_scores=scores if kind is StaticKind.EXTERNAL else None,
        )
        for kind in kinds
    ]

    d = _load(args.input, opts)
    report = ReplayReport()
    trace_fh = open(opts["trace_log"], "w", encoding="utf-8") if opts["trace_log"] else None
    try:
        for cfg in configs:
            report.extend(replay(d, cfg, workers=int(opts["workers"]), step_log=trace_fh))
    finally:
        if trace_fh is not None:
            trace_fh.close()

    atomic_write(args.out, report.to_csv())
    if opts["summary"]:
        if report.rows:
            summary = {label: s.to_dict() for label, s in summarize(report).items()}
        else:
            summary = {}
        atomic_write(opts["summary"], json.dumps(summary, indent=2, sort_keys=True) + "\n")
    log.info("wrote %d rows to %s", len(report), args.out)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    opts = _resolve(args, {k: REPLAY_DEFAULTS[k] for k in ("format", "col_test", "col_cycle", "col_verdict", "delimiter")})
    d = _load(args.input, opts)
    stats = dataset_stats(d, raw=args.raw)
    text = json.dumps(stats.to_dict(), indent=2) + "\n"
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_groups(spec: str) -> tuple[int, int]:
    try:
        count, size = (int(x) for x in spec.lower().split("x"))
    except ValueError:
        raise UsageError(f"--groups expects COUNTxSIZE, got {spec!r}") from None
    return count, size


def cmd_synth(args: argparse.Namespace) -> int:
    opts = _resolve(args, SYNTH_DEFAULTS)
    count, size = _parse_groups(str(opts["groups"]))
    cfg = SynthConfig(
        num_tests=int(opts["tests"]),
        num_cycles=int(opts["cycles"]),
        groups=uniform_groups(count, size, float(opts["group_rate"]), float(opts["rho"])),
        background=float(opts["background"]),
        flakiness=float(opts["flakiness"]),
        seed=int(opts["seed"]),
    )
    atomic_write(args.out, serialize_canonical(generate(cfg)))
    return EXIT_OK


def cmd_dump_tables(args: argparse.Namespace) -> int:
    opts = _resolve(args, {k: REPLAY_DEFAULTS[k] for k in ("format", "col_test", "col_cycle", "col_verdict", "delimiter", "history")})
    window = WindowConfig(int(opts["history"]))
    d = _load(args.input, opts)
    history = [c for c in d.cycles if c.cycle < args.cycle]
    table = build_tables(history, args.cycle, window)
    if args.out:
        buf = io.StringIO()
        dump_table(table, buf)
        atomic_write(args.out, buf.getvalue())
    else:
        dump_table(table, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyntcp",
        description="Static + dynamic (conditional probability) test prioritization replay.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="replay a dataset and report per-cycle APFD")
    _add_input_flags(p)
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--static", help="comma list of optimal,worst,random,external (default: optimal,random,worst)")
    p.add_argument("--dynamic", choices=("cp", "none"), help="default: cp")
    p.add_argument("--history", type=int, help=f"history window length (default: {DEFAULT_HISTORY})")
    p.add_argument("--k", type=float, help=f"score update multiplier (default: {DEFAULT_K})")
    p.add_argument("--reps", type=int, help=f"random repetitions per cycle (default: {DEFAULT_REPETITIONS})")
    p.add_argument("--cycles", type=int, help=f"evaluate at most the last N cycles (default: {DEFAULT_CYCLE_LIMIT})")
    p.add_argument("--seed", type=int, help="master seed (default: 0)")
    p.add_argument("--scores", help="CSV cycle,test_id,score for --static external")
    p.add_argument("--workers", type=int, help="parallel worker processes (default: 1)")
    p.add_argument("--trace-log", dest="trace_log", help="write per-step JSON lines of dynamic runs")
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--summary", help="summary JSON path")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("stats", help="dataset characteristics as JSON")
    _add_input_flags(p)
    p.add_argument("--raw", action="store_true", help="count records before keeping the last verdict")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic dataset in canonical CSV")
    p.add_argument("--config", help="JSON file with default values for any flag")
    p.add_argument("--tests", type=int, help="number of tests (default: 50)")
    p.add_argument("--cycles", type=int, help="number of cycles (default: 300)")
    p.add_argument("--groups", help="COUNTxSIZE correlated groups (default: 5x10)")
    p.add_argument("--group-rate", dest="group_rate", type=float, help="group fault rate (default: 0.3)")
    p.add_argument("--rho", type=float, help="within-group failure probability (default: 1.0)")
    p.add_argument("--background", type=float, help="background failure rate (default: 0.0)")
    p.add_argument("--flakiness", type=float, help="verdict flip rate (default: 0.0)")
    p.add_argument("--seed", type=int, help="seed (default: 0)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dump-tables", help="write the correlation table for one cycle")
    _add_input_flags(p)
    p.add_argument("--cycle", type=int, required=True, help="target cycle; only earlier cycles are used")
    p.add_argument("--history", type=int, help=f"history window length (default: {DEFAULT_HISTORY})")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_tables)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    func: Callable[[argparse.Namespace], int] = args.func
    try:
        return func(args)
    except (ConfigError, EmptyInputError) as exc:
        print(f"dyntcp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, MalformedInputError, DataIntegrityError, OSError, UnicodeDecodeError) as exc:
        print(f"dyntcp: error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
