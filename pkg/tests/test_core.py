import pytest
from conftest import F, P, X, make_log
from hypothesis import given
from hypothesis import strategies as st

from dyntcp.core import (
    Dataset,
    FormatError,
    MalformedInputError,
    Outcome,
    VerdictRecord,
    classify_verdict,
    is_evaluable,
    normalize_cycle,
)


@pytest.mark.parametrize(
    "raw, expected",
    [(0, Outcome.PASS), (1, Outcome.FAULT), (2, Outcome.FAULT), (3, Outcome.EXCLUDED)],
)
def test_classify_verdict(raw, expected):
    assert classify_verdict(raw) is expected


@pytest.mark.parametrize("raw", [-1, 4, 17, None, "0"])
def test_classify_verdict_rejects_unknown_codes(raw):
    with pytest.raises(FormatError, match="record 7"):
        classify_verdict(raw, where="record 7")


def rec(test, seq, raw, cycle=1):
    return VerdictRecord(test, cycle, raw, seq)


def test_normalize_keeps_last_verdict():
    log = normalize_cycle([rec("A", 0, 1), rec("A", 1, 0)])
    assert log.outcomes == {"A": P}


def test_normalize_single_record():
    assert normalize_cycle([rec("A", 0, 0)]).outcomes == {"A": P}


def test_normalize_mixed():
    log = normalize_cycle([rec("A", 0, 1), rec("B", 0, 0), rec("A", 1, 2)])
    assert log.outcomes == {"A": F, "B": P}


def test_normalize_uses_sequence_not_list_position():
    log = normalize_cycle([rec("A", 5, 0), rec("A", 2, 1)])
    assert log.outcomes == {"A": P}


def test_normalize_rejects_duplicate_sequence():
    with pytest.raises(MalformedInputError):
        normalize_cycle([rec("A", 0, 0), rec("A", 0, 1)])


def test_normalize_rejects_mixed_cycles():
    with pytest.raises(MalformedInputError):
        normalize_cycle([rec("A", 0, 0, cycle=1), rec("B", 1, 0, cycle=2)])


def test_empty_test_id_rejected():
    with pytest.raises(MalformedInputError):
        VerdictRecord("", 1, 0, 0)


records_strategy = st.lists(
    st.tuples(st.sampled_from("ABCDE"), st.sampled_from([0, 1, 2, 3])), min_size=1, max_size=20
).map(lambda rows: [rec(t, i, v) for i, (t, v) in enumerate(rows)])


@given(records_strategy)
def test_normalize_idempotent_and_counts(records):
    log = normalize_cycle(records)
    assert len(log.outcomes) == len({r.test for r in records})
    assert normalize_cycle(log.to_records()) == log
    # last occurrence by brute force
    for t, o in log.outcomes.items():
        last = [r for r in records if r.test == t][-1]
        assert o is classify_verdict(last.raw)


@pytest.mark.parametrize(
    "spec, expected",
    [("FP", True), ("FF", False), ("FX", False), ("PP", False), ("PXF", True), ("", False)],
)
def test_is_evaluable(spec, expected):
    assert is_evaluable(make_log(spec)) is expected


@given(st.text("FX", min_size=1, max_size=6))
def test_evaluable_monotone_adding_pass(spec):
    if "F" in spec:
        assert is_evaluable(make_log(spec + "P"))


@given(st.text("PX", min_size=1, max_size=6))
def test_evaluable_monotone_adding_fault(spec):
    if "P" in spec:
        assert is_evaluable(make_log(spec + "F"))


def test_cycle_log_views():
    log = make_log("FPXF")
    assert log.schedulable == ("A", "B", "D")
    assert log.faults == ("A", "D")
    assert log.passes == ("B",)


def test_dataset_requires_increasing_cycles():
    with pytest.raises(MalformedInputError):
        Dataset((make_log("F", 2), make_log("P", 1)))


def test_dataset_from_records_sorts_and_tracks_universe():
    d = Dataset.from_records([rec("A", 0, 0, cycle=2), rec("A", 1, 1, cycle=1), rec("B", 2, 3, cycle=1)])
    assert [c.cycle for c in d.cycles] == [1, 2]
    assert d.universe == {"A", "B"}
    assert d.cycles[0].outcomes == {"A": F, "B": X}
    assert len(d.raw_records) == 3
