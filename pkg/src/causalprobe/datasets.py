"""Benchmark datasets: natural-language variable names plus a ground-truth graph."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DatasetError
from .graphs import CausalGraph, EdgeState

DATA_DIR = Path(__file__).parent / "data" / "datasets"
PROVENANCES = ("paper-stated", "derived-from-cited-source", "user-supplied")
_TOP_FIELDS = {"name", "source", "variables", "edges", "allow_symmetric"}
_EDGE_FIELDS = {"from", "to", "kind", "provenance"}


@dataclass(frozen=True)
class BenchmarkDataset:
    name: str
    variables: tuple[str, ...]
    truth: CausalGraph
    source: str = ""
    # keyed by (from, to) exactly as written in the file
    provenance: dict = field(default_factory=dict)
    allow_symmetric: bool = False

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise DatasetError(f"{self.name}: duplicate variable names")
        if tuple(self.truth.nodes) != tuple(self.variables):
            raise DatasetError(f"{self.name}: truth graph nodes differ from variables")
        if self.truth.count(EdgeState.SYMMETRIC) and not self.allow_symmetric:
            raise DatasetError(f"{self.name}: symmetric truth edges need allow_symmetric")

    @property
    def n(self) -> int:
        return len(self.variables)


def expected_query_count(dataset_or_n, template_count: int) -> int:
    """Number of prompts a full pairwise probe issues: 2 * C(N, 2) * Q."""
    n = dataset_or_n if isinstance(dataset_or_n, int) else len(dataset_or_n.variables)
    if template_count < 1:
        raise ValueError("template_count must be at least 1")
    return 2 * math.comb(n, 2) * template_count


def dataset_from_dict(doc, where="<dict>") -> BenchmarkDataset:
    if not isinstance(doc, dict):
        raise DatasetError(f"{where}: top level must be an object")
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise DatasetError(f"{where}: unknown fields {sorted(unknown)}")
    for key in ("name", "variables"):
        if key not in doc:
            raise DatasetError(f"{where}: missing field {key!r}")
    variables = doc["variables"]
    if not isinstance(variables, list) or not all(isinstance(v, str) and v for v in variables):
        raise DatasetError(f"{where}: variables must be a list of non-empty strings")
    if len(set(variables)) != len(variables):
        dup = sorted({v for v in variables if variables.count(v) > 1})
        raise DatasetError(f"{where}: duplicate variable names {dup}")
    directed, symmetric, prov = [], [], {}
    seen = set()
    for k, edge in enumerate(doc.get("edges", [])):
        ew = f"{where}: edges[{k}]"
        if not isinstance(edge, dict):
            raise DatasetError(f"{ew}: must be an object")
        unknown = set(edge) - _EDGE_FIELDS
        if unknown:
            raise DatasetError(f"{ew}: unknown fields {sorted(unknown)}")
        a, b = edge.get("from"), edge.get("to")
        for v in (a, b):
            if v not in variables:
                raise DatasetError(f"{ew}: unknown variable {v!r}")
        if a == b:
            raise DatasetError(f"{ew}: self-loop on {a!r}")
        pair = frozenset((a, b))
        if pair in seen:
            raise DatasetError(f"{ew}: pair ({a!r}, {b!r}) listed twice")
        seen.add(pair)
        kind = edge.get("kind", "directed")
        if kind == "directed":
            directed.append((a, b))
        elif kind == "symmetric":
            symmetric.append((a, b))
        else:
            raise DatasetError(f"{ew}: kind must be directed or symmetric, not {kind!r}")
        p = edge.get("provenance", "user-supplied")
        if p not in PROVENANCES:
            raise DatasetError(f"{ew}: provenance must be one of {PROVENANCES}")
        prov[(a, b)] = p
    truth = CausalGraph.from_edges(variables, directed, symmetric)
    return BenchmarkDataset(doc["name"], tuple(variables), truth, doc.get("source", ""), prov,
                            bool(doc.get("allow_symmetric", False)))


def load_dataset(path) -> BenchmarkDataset:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return dataset_from_dict(doc, str(path))


def dataset_to_dict(ds: BenchmarkDataset) -> dict:
    edges = []
    for a, b in ds.truth.directed_edges():
        edges.append({"from": a, "to": b, "kind": "directed",
                      "provenance": _prov(ds, a, b)})
    for a, b in ds.truth.symmetric_edges():
        edges.append({"from": a, "to": b, "kind": "symmetric",
                      "provenance": _prov(ds, a, b)})
    doc = {"name": ds.name, "source": ds.source, "variables": list(ds.variables),
           "edges": edges}
    if ds.allow_symmetric:
        doc["allow_symmetric"] = True
    return doc


def _prov(ds, a, b):
    return ds.provenance.get((a, b)) or ds.provenance.get((b, a)) or "user-supplied"


def serialize(ds: BenchmarkDataset) -> str:
    return json.dumps(dataset_to_dict(ds), indent=2, ensure_ascii=False) + "\n"


def bundled_names() -> list[str]:
    return sorted(p.stem for p in DATA_DIR.glob("*.json"))


def get_dataset(name_or_path) -> BenchmarkDataset:
    """Load a bundled dataset by name, or any dataset file by path."""
    p = Path(name_or_path)
    if p.suffix == ".json" and p.exists():
        return load_dataset(p)
    candidate = DATA_DIR / f"{name_or_path}.json"
    if not candidate.exists():
        raise DatasetError(f"no bundled dataset named {name_or_path!r} "
                           f"(available: {', '.join(bundled_names())})")
    return load_dataset(candidate)
