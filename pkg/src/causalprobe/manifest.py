"""Experiment manifests: one JSON file describing a reproducible run.

Schema (all keys optional except ``kind``)::

    {
      "kind": "pairwise-probe",        # see KINDS
      "datasets": ["altitude"],         # bundled names or paths to dataset files
      "provider": "scripted",           # bundled provider name or config path
      "templates": [1, 2, 3, 4, 5],
      "cot_bank": null, "cot_k": 0,     # chain-of-thought exemplars
      "meta_policy": "as-no",           # or "exclude-pair"
      "bank": null,                     # question bank name or path
      "knowledge_base": null,           # assertion dump for knn-graphs
      "relation": "/r/Causes/", "language": "en",
      "store": null,                    # vector store path
      "rename": {},                     # old name -> new name
      "workers": 1,
      "seed": 0,
      "out": "runs/example", "cache": null
    }

The digest covers everything except ``out`` and ``cache``, which only say
where files go.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigurationError

KINDS = ("pairwise-probe", "chains", "word-chains", "question-bank", "knn-graphs", "scm-demo",
         "rename-probe")
_LOCATION_FIELDS = ("out", "cache")


@dataclass(frozen=True)
class ExperimentManifest:
    kind: str
    datasets: tuple[str, ...] = ()
    provider: str = "scripted"
    templates: tuple[int, ...] = (1, 2, 3, 4, 5)
    cot_bank: str | None = None
    cot_k: int = 0
    meta_policy: str = "as-no"
    bank: str | None = None
    knowledge_base: str | None = None
    relation: str = "/r/Causes/"
    language: str = "en"
    store: str | None = None
    rename: dict = field(default_factory=dict)
    workers: int = 1
    seed: int = 0
    out: str = "runs/latest"
    cache: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "templates", tuple(int(t) for t in self.templates))
        if self.meta_policy not in ("as-no", "exclude-pair"):
            raise ConfigurationError(f"unknown meta policy {self.meta_policy!r}")
        if not isinstance(self.seed, int):
            raise ConfigurationError("seed must be an integer")
        if self.cot_k < 0 or self.workers < 1:
            raise ConfigurationError("cot_k must be >= 0 and workers >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["datasets"] = list(self.datasets)
        d["templates"] = list(self.templates)
        return d

    def digest(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in _LOCATION_FIELDS}
        blob = json.dumps(d, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def with_overrides(self, **kw) -> "ExperimentManifest":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def validate(self) -> None:
        """Check that referenced datasets, provider, banks and files exist."""
        from .datasets import get_dataset
        from .gateway import load_provider
        from .prompts import load_cot_bank, load_question_bank

        for name in self.datasets:
            get_dataset(name)
        load_provider(self.provider)
        if self.cot_bank is not None:
            bank = load_cot_bank(self.cot_bank)
            if self.cot_k > len(bank):
                raise ConfigurationError(f"cot_k={self.cot_k} exceeds the {len(bank)} exemplars "
                                         f"of {self.cot_bank!r}")
        elif self.cot_k:
            raise ConfigurationError("cot_k given without cot_bank")
        if self.bank is not None:
            load_question_bank(self.bank)
        if self.knowledge_base is not None and not Path(self.knowledge_base).exists():
            raise ConfigurationError(f"knowledge base {self.knowledge_base!r} not found")


def manifest_from_dict(doc: dict) -> ExperimentManifest:
    names = {f.name for f in fields(ExperimentManifest)}
    unknown = set(doc) - names
    if unknown:
        raise ConfigurationError(f"unknown manifest fields {sorted(unknown)}")
    if "kind" not in doc:
        raise ConfigurationError("manifest needs a kind")
    return ExperimentManifest(**doc)


def load_manifest(path) -> ExperimentManifest:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return manifest_from_dict(doc)


def dump_json(obj) -> str:
    """Canonical JSON used for every artifact (stable key order, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
