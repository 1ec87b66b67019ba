import pytest
from hypothesis import given, strategies as st

from causalprobe.errors import LabelValidationError
from causalprobe.verdicts import (Verdict, VerdictRecord, VerdictValue, classify, escape_field,
                                  export_label_queue, import_labels, read_tsv, unescape_field,
                                  write_tsv)

Y, N, M, U = VerdictValue.YES, VerdictValue.NO, VerdictValue.META, VerdictValue.UNCLASSIFIED


@pytest.mark.parametrize("text,value", [
    ("Yes.", Y), ("yes, it does", Y), ("NO", N), ("No. Altitude is not...", N),
    ('"Yes"', Y), ("- No", N), ("1. Yes", Y), ("A: yes", Y), ("Answer: No", N),
    ("  \n  Yes", Y),
    ("Yesterday it rained", U), ("Nobody knows", U),
    ("There is insufficient information to say.", M),
    ("That cannot be determined from the text.", M),
    ("No, there is not enough information.", N),
    ("", U), ("Maybe.", U),
])
def test_classify(text, value):
    assert classify(text).value is value


def test_custom_meta_phrases():
    assert classify("I am unsure", meta_phrases=("unsure",)).value is M


@given(st.text())
def test_classify_is_total(text):
    v = classify(text)
    assert v.value in VerdictValue and v.raw == text


def test_manual_verdict_cannot_be_unclassified():
    with pytest.raises(ValueError):
        Verdict(U, "manual")


@given(st.text())
def test_escape_round_trip(text):
    assert unescape_field(escape_field(text)) == text
    assert "\t" not in escape_field(text) and "\n" not in escape_field(text)


def test_tsv_round_trip(tmp_path):
    rows = [("a\tb", "line\nbreak", "back\\slash")]
    write_tsv(tmp_path / "x.tsv", ("c1", "c2", "c3"), rows)
    header, back = read_tsv(tmp_path / "x.tsv")
    assert header == ["c1", "c2", "c3"] and [tuple(r) for r in back] == rows


def _records():
    return [VerdictRecord("r1", "d", 4, "a", "b", "Does a cause b?", classify("Perhaps.")),
            VerdictRecord("r2", "d", 4, "b", "a", "Does b cause a?", classify("No.")),
            VerdictRecord("r3", "d", 4, "a", "c", "Does a cause c?", classify("Hmm\tmaybe"))]


def test_label_round_trip(tmp_path):
    records = _records()
    path = tmp_path / "queue.tsv"
    assert export_label_queue(records, path) == 2
    header, rows = read_tsv(path)
    label = header.index("label")
    rows[0][label] = "YES"
    write_tsv(path, header, rows)
    updated = import_labels(path, records)
    assert updated[0].verdict.value is Y and updated[0].verdict.source == "manual"
    assert updated[2].verdict.value is U  # left blank
    assert updated[1] == records[1]


def test_empty_queue(tmp_path):
    records = [r for r in _records() if r.verdict.value is not U]
    path = tmp_path / "queue.tsv"
    assert export_label_queue(records, path) == 0
    assert path.read_text() == ""
    assert import_labels(path, records) == records


def test_bad_labels_are_rejected(tmp_path):
    records = _records()
    path = tmp_path / "queue.tsv"
    export_label_queue(records, path)
    header, rows = read_tsv(path)
    rows[0][header.index("label")] = "probably"
    write_tsv(path, header, rows)
    with pytest.raises(LabelValidationError) as info:
        import_labels(path, records)
    assert "row 2" in str(info.value)
    rows[0][header.index("label")] = "no"
    rows[0][header.index("id")] = "ghost"
    write_tsv(path, header, rows)
    with pytest.raises(LabelValidationError):
        import_labels(path, records)
