"""Synthetic CI histories with planted co-failure groups.

Each cycle, every group fires a shared fault event with the group's rate.
Members of a fired group fail with probability ``rho``; otherwise (and for
ungrouped tests) they fail at the background rate. Finally each verdict is
flipped independently with the flakiness rate. With background and
flakiness at zero, P(a fails | b fails) for two members of one group is
exactly ``rho``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, CycleLog, Dataset, Outcome


@dataclass(frozen=True, slots=True)
class GroupSpec:
    members: tuple[int, ...]
    rate: float
    rho: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        _check_rate("group rate", self.rate)
        _check_rate("rho", self.rho)


@dataclass(frozen=True)
class SynthConfig:
    num_tests: int
    num_cycles: int
    groups: tuple[GroupSpec, ...] = field(default=())
    background: float = 0.0
    flakiness: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))
        if self.num_tests < 1 or self.num_cycles < 1:
            raise ConfigError("num_tests and num_cycles must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        _check_rate("background", self.background)
        _check_rate("flakiness", self.flakiness)
        seen: set[int] = set()
        for g in self.groups:
            for m in g.members:
                if not 0 <= m < self.num_tests:
                    raise ConfigError(f"group member {m} outside 0..{self.num_tests - 1}")
                if m in seen:
                    raise ConfigError(f"test {m} belongs to more than one group")
                seen.add(m)

    def test_name(self, i: int) -> str:
        width = len(str(self.num_tests - 1))
        return f"t{i:0{width}d}"

    def group_names(self) -> list[list[str]]:
        return [[self.test_name(m) for m in g.members] for g in self.groups]


def _check_rate(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must be in [0, 1], got {value}")


def uniform_groups(
    count: int, size: int, rate: float, rho: float, *, start: int = 0
) -> tuple[GroupSpec, ...]:
    """``count`` groups of ``size`` consecutive test indices."""
    if count < 0 or size < 1:
        raise ConfigError("group count must be >= 0 and size >= 1")
    return tuple(
        GroupSpec(tuple(range(start + g * size, start + (g + 1) * size)), rate, rho)
        for g in range(count)
    )


def generate(cfg: SynthConfig) -> Dataset:
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n = cfg.num_tests
    names = [cfg.test_name(i) for i in range(n)]
    members: Sequence[np.ndarray] = [np.array(g.members, dtype=int) for g in cfg.groups]
    rates = np.array([g.rate for g in cfg.groups])
    rhos = np.array([g.rho for g in cfg.groups])

    cycles = []
    for c in range(cfg.num_cycles):
        fired = rng.random(len(cfg.groups)) < rates
        prob = np.full(n, cfg.background)
        for g, idx in enumerate(members):
            if fired[g]:
                prob[idx] = rhos[g]
        failed = rng.random(n) < prob
        failed ^= rng.random(n) < cfg.flakiness
        outcomes = {
            name: Outcome.FAULT if f else Outcome.PASS for name, f in zip(names, failed)
        }
        cycles.append(CycleLog(c + 1, outcomes))
    return Dataset(tuple(cycles))
