from __future__ import annotations

from hypothesis import strategies as st

from dyntcp.core import CycleLog, Outcome

F = Outcome.FAULT
P = Outcome.PASS
X = Outcome.EXCLUDED


def make_log(spec: str, cycle: int = 1) -> CycleLog:
    """``"FPX"`` -> tests A, B, C with Fault, Pass, Excluded outcomes."""
    codes = {"F": F, "P": P, "X": X}
    return CycleLog(cycle, {chr(ord("A") + i): codes[c] for i, c in enumerate(spec)})


def evaluable_specs(max_size: int = 7):
    return (
        st.lists(st.sampled_from("FP"), min_size=2, max_size=max_size)
        .filter(lambda xs: "F" in xs and "P" in xs)
        .map("".join)
    )


# (criterion id, "PASS" | "FAIL" | "SKIP", detail) appended by test_acceptance.py
ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0][2:])):
        terminalreporter.write_line(f"{name} {status}: {detail}")
