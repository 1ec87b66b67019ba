"""Naive pairwise discovery: ask about every ordered pair, merge into a graph."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

from .datasets import BenchmarkDataset
from .errors import CausalProbeError, DatasetError, InputError, ProbeError
from .graphs import CausalGraph, EdgeState
from .prompts import Symmetry, get_template, instantiate_pair
from .verdicts import (DEFAULT_META_PHRASES, Verdict, VerdictRecord, VerdictValue, classify,
                       read_tsv, write_tsv)

META_POLICIES = ("as-no", "exclude-pair")


def ordered_pairs(variables: Sequence[str]) -> list[tuple[str, str]]:
    return list(itertools.permutations(variables, 2))


def record_id(dataset: str, template: int, i: int, j: int) -> str:
    return f"{dataset}:t{template}:{i}>{j}"


@dataclass(frozen=True)
class EdgeVerdictTable:
    """Verdicts for every ordered pair of one dataset under one template."""
    dataset: str
    template: int
    nodes: tuple[str, ...]
    records: tuple[VerdictRecord, ...]
    provider: str = ""
    model: str = ""
    timestamp: float | None = field(default=None, compare=False)

    def __post_init__(self):
        expected = set(ordered_pairs(self.nodes))
        got = [(r.cause, r.effect) for r in self.records]
        if len(got) != len(set(got)) or set(got) != expected:
            missing = sorted(expected - set(got))
            raise InputError(f"verdict table for {self.dataset!r} template {self.template} "
                             f"is incomplete or has extra pairs (missing {missing[:3]})")

    @property
    def verdicts(self) -> dict[tuple[str, str], Verdict]:
        return {(r.cause, r.effect): r.verdict for r in self.records}

    def verdict(self, cause: str, effect: str) -> Verdict:
        return self.verdicts[(cause, effect)]

    def with_records(self, records: Sequence[VerdictRecord]) -> "EdgeVerdictTable":
        mine = {r.id: r for r in records if r.id.startswith(f"{self.dataset}:t{self.template}:")}
        return replace(self, records=tuple(mine.get(r.id, r) for r in self.records))


def run_pairwise_probe(dataset: BenchmarkDataset, templates: Sequence[int], gateway,
                       max_workers: int = 1,
                       meta_phrases: Sequence[str] = DEFAULT_META_PHRASES) -> list[EdgeVerdictTable]:
    """Query every ordered pair under every template; one table per template.

    Exchanges go through the gateway's cache, so an interrupted run resumes
    where it stopped.
    """
    if not templates:
        raise InputError("at least one template is required")
    idx = {v: k for k, v in enumerate(dataset.variables)}
    jobs = []
    for t in templates:
        tmpl = get_template(t)
        for a, b in ordered_pairs(dataset.variables):
            jobs.append((tmpl.id, a, b, instantiate_pair(tmpl, a, b)))

    def ask(job):
        tid, a, b, prompt = job
        try:
            return gateway.complete(prompt)
        except CausalProbeError as exc:
            raise ProbeError(f"query ({a!r}, {b!r}) under template {tid} failed: {exc}",
                             pair=(a, b), template=tid) from exc

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            answers = list(pool.map(ask, jobs))
    else:
        answers = [ask(j) for j in jobs]

    by_template: dict[int, list[VerdictRecord]] = {}
    for (tid, a, b, prompt), text in zip(jobs, answers):
        rec = VerdictRecord(record_id(dataset.name, tid, idx[a], idx[b]), dataset.name, tid, a, b,
                            prompt, classify(text, meta_phrases))
        by_template.setdefault(tid, []).append(rec)
    cfg = gateway.cfg
    return [EdgeVerdictTable(dataset.name, tid, dataset.variables, tuple(recs), cfg.name, cfg.model)
            for tid, recs in by_template.items()]


_MERGE = {
    (True, True): EdgeState.SYMMETRIC,
    (True, False): EdgeState.FORWARD,
    (False, True): EdgeState.BACKWARD,
    (False, False): EdgeState.ABSENT,
}


def merge_flags(forward: bool, backward: bool) -> EdgeState:
    return _MERGE[(bool(forward), bool(backward))]


def merge_verdicts(forward: Verdict, backward: Verdict) -> EdgeState:
    """Edge state for (a, b) from v(a, b) and v(b, a); anything but Yes counts as No."""
    return merge_flags(forward.is_yes, backward.is_yes)


def assemble_graph(table: EdgeVerdictTable, meta_policy: str = "as-no") -> CausalGraph:
    if meta_policy not in META_POLICIES:
        raise InputError(f"meta policy must be one of {META_POLICIES}")
    v = table.verdicts
    g = CausalGraph.empty(table.nodes)
    states = tuple(merge_verdicts(v[(a, b)], v[(b, a)]) for a, b, _ in g.pairs())
    return CausalGraph(table.nodes, states)


def excluded_pairs(table: EdgeVerdictTable) -> list[tuple[str, str]]:
    """Unordered pairs where both verdicts are Meta."""
    v = table.verdicts
    return [(a, b) for a, b in itertools.combinations(table.nodes, 2)
            if v[(a, b)].value is VerdictValue.META and v[(b, a)].value is VerdictValue.META]


def inconsistent_pairs(table: EdgeVerdictTable) -> list[tuple[str, str]]:
    """Pairs answered one way only under a symmetric wording."""
    if get_template(table.template).symmetry is not Symmetry.SYMMETRIC:
        return []
    v = table.verdicts
    return [(a, b) for a, b in itertools.combinations(table.nodes, 2)
            if v[(a, b)].is_yes != v[(b, a)].is_yes]


def is_excluded(tables: Sequence[EdgeVerdictTable], meta_policy: str) -> bool:
    """True when the exclude-pair policy removes this run from metric tables."""
    return meta_policy == "exclude-pair" and any(excluded_pairs(t) for t in tables)


def rename_variables(dataset: BenchmarkDataset, mapping: dict[str, str]) -> BenchmarkDataset:
    """Substitute variable names; unmapped names stay as they are."""
    unknown = set(mapping) - set(dataset.variables)
    if unknown:
        raise DatasetError(f"mapping names unknown variables {sorted(unknown)}")
    new = tuple(mapping.get(v, v) for v in dataset.variables)
    if len(set(new)) != len(new) or not all(new):
        raise DatasetError("variable renaming must be injective and give non-empty names")
    prov = {(mapping.get(a, a), mapping.get(b, b)): p for (a, b), p in dataset.provenance.items()}
    return replace(dataset, variables=new, truth=dataset.truth.relabel(mapping), provenance=prov)


# audit files -----------------------------------------------------------------

TABLE_COLUMNS = ("id", "dataset", "template", "cause", "effect", "prompt", "response",
                 "verdict", "source", "rule", "provider", "model")


def write_verdict_tables(tables: Sequence[EdgeVerdictTable], path) -> None:
    rows = []
    for t in tables:
        for r in t.records:
            v = r.verdict
            rows.append((r.id, r.dataset, r.template, r.cause, r.effect, r.prompt, v.raw,
                         v.value.value, v.source, v.rule or "", t.provider, t.model))
    write_tsv(path, TABLE_COLUMNS, rows)


def read_verdict_tables(path, nodes: Sequence[str]) -> list[EdgeVerdictTable]:
    header, rows = read_tsv(path)
    if tuple(header) != TABLE_COLUMNS:
        raise InputError(f"{path}: unexpected verdict table header")
    groups: dict[int, list] = {}
    meta = {}
    for row in rows:
        rid, ds, tid, cause, effect, prompt, raw, value, source, rule, prov, model = row
        v = Verdict(VerdictValue(value), source, raw, rule or None)
        groups.setdefault(int(tid), []).append(
            VerdictRecord(rid, ds, int(tid), cause, effect, prompt, v))
        meta[int(tid)] = (ds, prov, model)
    return [EdgeVerdictTable(meta[t][0], t, tuple(nodes), tuple(recs), meta[t][1], meta[t][2])
            for t, recs in groups.items()]
