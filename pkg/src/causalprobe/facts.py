"""Knowledge-base causal facts, templated statements, and 1-NN edge prediction.

Facts come from a ConceptNet-style assertion dump. Each fact yields one
causal and one anti-causal (cause and effect swapped) statement per
template; a query statement is predicted present iff its nearest stored
statement by cosine similarity is causal.
"""
from __future__ import annotations

import enum
import hashlib
import itertools
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .datasets import BenchmarkDataset
from .errors import ConfigurationError, InputError
from .graphs import CausalGraph
from .prompts import declarative_statement, get_template

log = logging.getLogger(__name__)

DEFAULT_RELATION = "/r/Causes/"
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CausalFact:
    cause: str
    effect: str
    relation: str = DEFAULT_RELATION
    weight: float | None = None

    def __post_init__(self):
        if not self.cause or not self.effect:
            raise InputError("fact texts must be non-empty")
        if self.cause == self.effect:
            raise InputError(f"fact has identical cause and effect {self.cause!r}")


@dataclass(frozen=True)
class IngestReport:
    facts: list
    rows: int
    matched: int
    malformed: int
    duplicates: int


def _concept(uri: str, language: str, normalize) -> str | None:
    """Surface text of ``/c/<lang>/<term>[/...]`` or None for other languages."""
    parts = uri.split("/")
    if len(parts) < 4 or parts[1] != "c" or not parts[3]:
        raise ValueError(uri)
    if parts[2] != language:
        return None
    return normalize(parts[3])


def normalize_text(term: str) -> str:
    """Underscores to spaces, lowercase, collapsed whitespace."""
    return " ".join(term.replace("_", " ").lower().split())


def ingest_report(path, relation: str = DEFAULT_RELATION, language: str = "en",
                  normalize=normalize_text) -> IngestReport:
    """Parse a tab-separated assertion dump (edge, relation, start, end, metadata).

    ``normalize`` maps a concept's URI term to its surface text; part-of-speech
    suffixes after the term are always dropped.
    """
    want = relation.rstrip("/")
    rows = matched = malformed = dups = 0
    seen: dict[tuple[str, str], CausalFact] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            rows += 1
            cols = line.split("\t")
            if len(cols) < 4:
                malformed += 1
                continue
            if cols[1].rstrip("/") != want:
                continue
            try:
                cause = _concept(cols[2], language, normalize)
                effect = _concept(cols[3], language, normalize)
            except ValueError:
                malformed += 1
                continue
            if cause is None or effect is None or cause == effect:
                continue
            weight = None
            if len(cols) > 4 and cols[4].strip():
                try:
                    weight = json.loads(cols[4]).get("weight")
                except (json.JSONDecodeError, AttributeError):
                    malformed += 1
                    continue
            matched += 1
            if (cause, effect) in seen:
                dups += 1
                continue
            seen[(cause, effect)] = CausalFact(cause, effect, want + "/", weight)
    facts = [seen[k] for k in sorted(seen)]
    if not facts:
        log.warning("no %s relations found in %s", relation, path)
    if malformed:
        log.warning("skipped %d malformed rows in %s", malformed, path)
    return IngestReport(facts, rows, matched, malformed, dups)


def ingest_knowledge_base(path, relation: str = DEFAULT_RELATION, language: str = "en",
                          normalize=normalize_text) -> list[CausalFact]:
    return ingest_report(path, relation, language, normalize).facts


class Polarity(enum.Enum):
    CAUSAL = "causal"
    ANTI_CAUSAL = "anti-causal"


_POLARITY_CODE = {Polarity.CAUSAL: 1, Polarity.ANTI_CAUSAL: 0}
_CODE_POLARITY = {v: k for k, v in _POLARITY_CODE.items()}


@dataclass(frozen=True)
class Statement:
    text: str
    polarity: Polarity
    fact_id: int
    template: int


def generate_statements(facts: Sequence[CausalFact], templates: Sequence[int]) -> list[Statement]:
    """Causal and anti-causal statement for every fact and template."""
    out = []
    for fid, fact in enumerate(facts):
        for t in templates:
            tmpl = get_template(t)
            out.append(Statement(declarative_statement(tmpl, fact.cause, fact.effect),
                                 Polarity.CAUSAL, fid, tmpl.id))
            out.append(Statement(declarative_statement(tmpl, fact.effect, fact.cause),
                                 Polarity.ANTI_CAUSAL, fid, tmpl.id))
    return out


# vector store --------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingRecord:
    fact_id: int
    template: int
    polarity: Polarity
    text: str


MAGIC = b"CPVS"
VERSION = 1
_HEADER = struct.Struct("<4sHII")
_REC_HEAD = struct.Struct("<IBB")


def _unit_rows(vectors32: np.ndarray) -> np.ndarray:
    m = vectors32.astype(np.float64)
    return m / np.linalg.norm(m, axis=1, keepdims=True)


class VectorStore:
    """Immutable list of statements with unit-norm embeddings.

    Vectors are kept as float32 (the on-disk precision) and renormalized in
    float64 for search, so a loaded store searches exactly like the built one.
    """

    def __init__(self, model_id: str, records: Sequence[EmbeddingRecord], vectors32: np.ndarray):
        vectors32 = np.ascontiguousarray(vectors32, dtype=np.float32)
        if vectors32.ndim != 2 or vectors32.shape[0] != len(records):
            raise InputError("need one vector per record")
        keys = [(r.fact_id, r.template, r.polarity) for r in records]
        if len(set(keys)) != len(keys):
            raise InputError("(fact id, template, polarity) must be unique")
        self.model_id = model_id
        self.records = tuple(records)
        self.vectors32 = vectors32
        self.vectors32.setflags(write=False)
        self.matrix = _unit_rows(vectors32) if len(records) else np.zeros((0, vectors32.shape[1]))
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.vectors32.shape[1]

    def __len__(self):
        return len(self.records)

    def to_bytes(self) -> bytes:
        mid = self.model_id.encode("utf-8")
        parts = [_HEADER.pack(MAGIC, VERSION, self.dim, len(self)), struct.pack("<H", len(mid)), mid]
        for rec, vec in zip(self.records, self.vectors32):
            text = rec.text.encode("utf-8")
            parts += [_REC_HEAD.pack(rec.fact_id, rec.template, _POLARITY_CODE[rec.polarity]),
                      vec.astype("<f4").tobytes(), struct.pack("<I", len(text)), text]
        body = b"".join(parts)
        return body + hashlib.sha256(body).digest()

    @property
    def digest(self) -> str:
        return self.to_bytes()[-32:].hex()

    def save(self, path) -> str:
        data = self.to_bytes()
        Path(path).write_bytes(data)
        return data[-32:].hex()

    @classmethod
    def from_bytes(cls, data: bytes) -> "VectorStore":
        if len(data) < _HEADER.size + 2 + 32:
            raise InputError("store file is truncated")
        body, digest = data[:-32], data[-32:]
        if hashlib.sha256(body).digest() != digest:
            raise InputError("store digest does not match its contents")
        magic, version, dim, count = _HEADER.unpack_from(body, 0)
        if magic != MAGIC or version != VERSION:
            raise InputError("not a vector store file (bad magic or version)")
        off = _HEADER.size
        (mlen,) = struct.unpack_from("<H", body, off)
        off += 2
        model_id = body[off:off + mlen].decode("utf-8")
        off += mlen
        records, vecs = [], np.empty((count, dim), dtype=np.float32)
        for k in range(count):
            fid, tid, pol = _REC_HEAD.unpack_from(body, off)
            off += _REC_HEAD.size
            vecs[k] = np.frombuffer(body, dtype="<f4", count=dim, offset=off)
            off += 4 * dim
            (tlen,) = struct.unpack_from("<I", body, off)
            off += 4
            text = body[off:off + tlen].decode("utf-8")
            off += tlen
            records.append(EmbeddingRecord(fid, tid, _CODE_POLARITY[pol], text))
        if off != len(body):
            raise InputError("trailing bytes in store file")
        return cls(model_id, records, vecs)

    @classmethod
    def load(cls, path) -> "VectorStore":
        return cls.from_bytes(Path(path).read_bytes())


def build_store(statements: Sequence[Statement], gateway) -> VectorStore:
    """Embed every statement through the (cached) gateway."""
    if not statements:
        raise InputError("cannot build a store from zero statements")
    vecs, dim = [], None
    for s in statements:
        v = gateway.embed(s.text)
        if dim is None:
            dim = v.shape[0]
        elif v.shape[0] != dim:
            raise InputError(f"embedding dimension changed from {dim} to {v.shape[0]} "
                             f"at {s.text!r}")
        vecs.append(v)
    records = [EmbeddingRecord(s.fact_id, s.template, s.polarity, s.text) for s in statements]
    return VectorStore(gateway.cfg.embed_model_id(), records, np.array(vecs))


# prediction ----------------------------------------------------------------

@dataclass(frozen=True)
class KnnPrediction:
    cause: str
    effect: str
    template: int
    query: str
    present: bool
    match_index: int
    match_text: str
    match_polarity: Polarity
    similarity: float
    tied: int

    def audit(self) -> dict:
        return {"cause": self.cause, "effect": self.effect, "template": self.template,
                "query": self.query, "present": self.present, "match_index": self.match_index,
                "match_text": self.match_text, "match_polarity": self.match_polarity.value,
                "similarity": self.similarity, "tie": self.tied > 1}


def nearest(store: VectorStore, query: np.ndarray, backend=None) -> tuple[int, float, int]:
    """Index and cosine of the closest record; lowest index wins ties."""
    if not len(store):
        raise InputError("the vector store is empty")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (store.dim,):
        raise InputError(f"query dimension {query.shape} does not match store dimension {store.dim}")
    kern = backend or _accel.kernels
    return kern.cosine_argmax(store.matrix, np.ascontiguousarray(query), TIE_TOLERANCE)


def knn_predict_edge(pair: tuple[str, str], template, store: VectorStore, gateway,
                     backend=None) -> KnnPrediction:
    if store.model_id != gateway.cfg.embed_model_id():
        raise ConfigurationError(f"store was built with {store.model_id!r}, provider embeds "
                                 f"with {gateway.cfg.embed_model_id()!r}")
    cause, effect = pair
    tmpl = get_template(template)
    text = declarative_statement(tmpl, cause, effect)
    idx, sim, ties = nearest(store, gateway.embed(text), backend)
    rec = store.records[idx]
    return KnnPrediction(cause, effect, tmpl.id, text, rec.polarity is Polarity.CAUSAL, idx,
                         rec.text, rec.polarity, sim, ties)


def knn_graph(dataset: BenchmarkDataset, template, store: VectorStore, gateway,
              backend=None) -> tuple[CausalGraph, list[KnnPrediction]]:
    """Predict every ordered pair and merge with the pairwise rule table."""
    from .discovery import merge_flags

    preds = {(a, b): knn_predict_edge((a, b), template, store, gateway, backend)
             for a, b in itertools.permutations(dataset.variables, 2)}
    g = CausalGraph.empty(dataset.variables)
    states = tuple(merge_flags(preds[(a, b)].present, preds[(b, a)].present) for a, b, _ in g.pairs())
    return CausalGraph(dataset.variables, states), list(preds.values())
