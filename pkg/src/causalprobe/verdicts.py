"""Classifying raw model text into verdicts, plus the manual-labeling round trip."""
from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import LabelValidationError

log = logging.getLogger(__name__)


class VerdictValue(enum.Enum):
    YES = "yes"
    NO = "no"
    META = "meta"
    UNCLASSIFIED = "unclassified"


DEFAULT_META_PHRASES = (
    "insufficient information",
    "cannot be determined",
    "no statement can be made",
    "not enough information",
)

_LEADING_JUNK = re.compile(
    r"""^(?:
        ["'`“”‘’«»]+     # quotes
      | [-*•>]+                                   # bullets
      | \(?\d+[.)]                                     # 1.  1)  (1)
      | \(?[A-Za-z][.)](?=\s)                          # a)  A.
      | (?:answer|a)\s*:                               # answer labels
    )\s*""", re.IGNORECASE | re.VERBOSE)
_PREFIX = re.compile(r"(yes|no)\b", re.IGNORECASE)


@dataclass(frozen=True)
class Verdict:
    value: VerdictValue
    source: str = "auto"
    raw: str = ""
    rule: str | None = None

    def __post_init__(self):
        if self.source not in ("auto", "manual"):
            raise ValueError(f"unknown verdict source {self.source!r}")
        if self.source == "manual" and self.value is VerdictValue.UNCLASSIFIED:
            raise ValueError("manual verdicts cannot be unclassified")

    @property
    def is_yes(self) -> bool:
        return self.value is VerdictValue.YES


def _strip_leading(text: str) -> str:
    s = text.lstrip()
    while True:
        t = _LEADING_JUNK.sub("", s, count=1).lstrip()
        if t == s:
            return s
        s = t


def classify(text: str, meta_phrases: Sequence[str] = DEFAULT_META_PHRASES) -> Verdict:
    """Auto-classify a response. Total and deterministic.

    A leading yes/no wins over any meta phrase later in the text.
    """
    text = text or ""
    body = _strip_leading(text)
    m = _PREFIX.match(body)
    if m:
        word = m.group(1).lower()
        return Verdict(VerdictValue.YES if word == "yes" else VerdictValue.NO, "auto", text,
                       f"prefix-{word}")
    low = text.lower()
    for phrase in meta_phrases:
        if phrase.lower() in low:
            return Verdict(VerdictValue.META, "auto", text, f"meta:{phrase}")
    return Verdict(VerdictValue.UNCLASSIFIED, "auto", text, None)


@dataclass(frozen=True)
class VerdictRecord:
    """One classified exchange with enough context to label it by hand."""
    id: str
    dataset: str
    template: int
    cause: str
    effect: str
    prompt: str
    verdict: Verdict


# tab-separated text with backslash escapes ------------------------------------

_ESC = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESC = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_field(s: str) -> str:
    return "".join(_ESC.get(c, c) for c in s)


def unescape_field(s: str) -> str:
    out, it = [], iter(s)
    for c in it:
        if c == "\\":
            nxt = next(it, "")
            out.append(_UNESC.get(nxt, "\\" + nxt))
        else:
            out.append(c)
    return "".join(out)


def write_tsv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = ["\t".join(header)]
    lines += ["\t".join(escape_field(str(c)) for c in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_tsv(path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return [], []
    lines = text.rstrip("\n").split("\n")
    header = lines[0].split("\t")
    rows = [[unescape_field(c) for c in line.split("\t")] for line in lines[1:]]
    return header, rows


QUEUE_COLUMNS = ("id", "dataset", "template", "cause", "effect", "prompt", "response", "label")


def export_label_queue(records: Iterable[VerdictRecord], path) -> int:
    """Write every unclassified record to an editable queue; returns the count.

    Fill the ``label`` column with yes, no or meta and re-import.
    """
    rows = [(r.id, r.dataset, r.template, r.cause, r.effect, r.prompt, r.verdict.raw, "")
            for r in records if r.verdict.value is VerdictValue.UNCLASSIFIED]
    if not rows:
        Path(path).write_text("", encoding="utf-8")
        return 0
    write_tsv(path, QUEUE_COLUMNS, rows)
    return len(rows)


_LABELS = {"yes": VerdictValue.YES, "no": VerdictValue.NO, "meta": VerdictValue.META}


def import_labels(path, records: Sequence[VerdictRecord]) -> list[VerdictRecord]:
    """Apply a filled-in queue. Rows with an empty label are left untouched."""
    header, rows = read_tsv(path)
    if not rows:
        return list(records)
    if "id" not in header or "label" not in header:
        raise LabelValidationError(f"{path}: queue header must contain id and label columns")
    id_col, label_col = header.index("id"), header.index("label")
    by_id = {r.id: r for r in records}
    updates = {}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise LabelValidationError(f"{path}: row {lineno} has {len(row)} columns, "
                                       f"expected {len(header)}")
        rid, label = row[id_col], row[label_col].strip().lower()
        if not label:
            continue
        if rid not in by_id:
            raise LabelValidationError(f"{path}: row {lineno} labels unknown item {rid!r}")
        if label not in _LABELS:
            raise LabelValidationError(f"{path}: row {lineno} has label {row[label_col]!r}; "
                                       f"use yes, no or meta")
        old = by_id[rid].verdict
        if old.source == "auto" and old.value is not VerdictValue.UNCLASSIFIED:
            log.warning("manual label replaces auto verdict %s for %s", old.value.value, rid)
        updates[rid] = Verdict(_LABELS[label], "manual", old.raw, "manual")
    return [replace(r, verdict=updates[r.id]) if r.id in updates else r for r in records]
