"""Provider-agnostic completion and embedding access.

Every exchange goes through a durable append-only cache keyed by a digest of
(operation, provider, model, decoding parameters, prompt), so a warm cache
replays a run without touching the network. Remote providers speak the
OpenAI-compatible REST shape; the mock provider answers from scripted rules.
"""
from __future__ import annotations

import collections
import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import (CacheCorruptionError, ConfigurationError, InputError, ThrottledError,
                     TransportError, UnmatchedPromptError)

log = logging.getLogger(__name__)

PROVIDER_DIR = Path(__file__).parent / "data" / "providers"
SENTINEL_ANSWER = "[mock: no scripted answer]"
WINDOW_SECONDS = 60.0
# in-process mocks cost nothing, so their default budget is effectively unlimited
MOCK_RPM = 1_000_000


@dataclass(frozen=True)
class MockRule:
    response: str
    match: str | None = None
    pattern: str | None = None


@dataclass(frozen=True)
class MockScript:
    rules: tuple[MockRule, ...] = ()
    strict: bool = True
    embed_mode: str = "seeded"
    embed_dim: int = 64

    def __post_init__(self):
        exact: dict[str, str] = {}
        patterns: dict[str, str] = {}
        for r in self.rules:
            if (r.match is None) == (r.pattern is None):
                raise ConfigurationError("each mock rule needs exactly one of match/pattern")
            if r.match is not None:
                if r.match in exact and exact[r.match] != r.response:
                    raise ConfigurationError(f"conflicting answers for prompt {r.match!r}")
                exact[r.match] = r.response
            else:
                if r.pattern in patterns and patterns[r.pattern] != r.response:
                    raise ConfigurationError(f"conflicting answers for pattern {r.pattern!r}")
                try:
                    re.compile(r.pattern)
                except re.error as exc:
                    raise ConfigurationError(f"bad pattern {r.pattern!r}: {exc}") from None
                patterns[r.pattern] = r.response
        if self.embed_mode not in ("seeded", "ngram"):
            raise ConfigurationError(f"unknown mock embed mode {self.embed_mode!r}")
        object.__setattr__(self, "_exact", exact)
        object.__setattr__(self, "_patterns", tuple(patterns.items()))

    def answer(self, prompt: str) -> str:
        if prompt in self._exact:
            return self._exact[prompt]
        hits = [(p, r) for p, r in self._patterns if re.search(p, prompt)]
        if len({p for p, _ in hits}) > 1:
            raise ConfigurationError(
                f"overlapping mock patterns {[p for p, _ in hits]} for prompt {prompt!r}")
        if hits:
            return hits[0][1]
        if self.strict:
            raise UnmatchedPromptError(prompt)
        return SENTINEL_ANSWER


@dataclass(frozen=True)
class ProviderConfig:
    name: str
    model: str
    kind: str = "openai"
    base_url: str = "https://api.openai.com/v1"
    embedding_model: str | None = None
    temperature: float = 0.0
    max_tokens: int = 256
    stop: tuple[str, ...] = ()
    timeout: float = 60.0
    max_retries: int = 3
    rpm: int = 60
    api_key_env: str | None = None
    mock: MockScript | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.rpm <= 0:
            raise ConfigurationError("requests-per-minute budget must be positive")
        if self.kind not in ("openai", "mock"):
            raise ConfigurationError(f"unknown provider kind {self.kind!r}")
        if self.kind == "mock" and self.mock is None:
            raise ConfigurationError("mock provider needs a script")
        object.__setattr__(self, "stop", tuple(self.stop))

    def decoding(self) -> dict:
        return {"temperature": self.temperature, "max_tokens": self.max_tokens,
                "stop": list(self.stop)}

    @property
    def credential_env(self) -> str:
        if self.api_key_env:
            return self.api_key_env
        return "PROVIDER_" + re.sub(r"[^A-Z0-9]", "_", self.name.upper()) + "_API_KEY"

    def embed_model_id(self) -> str:
        return self.embedding_model or self.model


def mock_provider(script=None, strict: bool = True, name: str = "mock", model: str = "mock-1",
                  embed_mode: str = "seeded", embed_dim: int = 64, **kw) -> ProviderConfig:
    """Scripted in-process provider.

    ``script`` is a ``{prompt: answer}`` dict or a list of rule dicts with
    ``match`` or ``pattern`` plus ``response``.
    """
    rules = []
    if isinstance(script, dict):
        rules = [MockRule(response=v, match=k) for k, v in script.items()]
    elif script:
        for r in script:
            rules.append(MockRule(r["response"], r.get("match"), r.get("pattern")))
    ms = MockScript(tuple(rules), strict, embed_mode, embed_dim)
    kw.setdefault("rpm", MOCK_RPM)
    return ProviderConfig(name=name, model=model, kind="mock", mock=ms, **kw)


def provider_from_dict(doc: dict) -> ProviderConfig:
    doc = dict(doc)
    kind = doc.get("kind", "openai")
    if kind == "mock":
        return mock_provider(doc.pop("rules", None), strict=doc.pop("strict", True),
                             name=doc.pop("name", "mock"), model=doc.pop("model", "mock-1"),
                             embed_mode=doc.pop("embed_mode", "seeded"),
                             embed_dim=doc.pop("embed_dim", 64),
                             **{k: v for k, v in doc.items() if k != "kind"})
    return ProviderConfig(**doc)


def load_provider(name_or_path) -> ProviderConfig:
    p = Path(name_or_path)
    if not p.exists():
        p = PROVIDER_DIR / f"{name_or_path}.json"
    if not p.exists():
        names = sorted(q.stem for q in PROVIDER_DIR.glob("*.json"))
        raise ConfigurationError(f"no provider config {name_or_path!r} (bundled: {names})")
    return provider_from_dict(json.loads(p.read_text(encoding="utf-8")))


def cache_key(cfg: ProviderConfig, prompt: str, op: str = "complete") -> str:
    if op == "complete":
        payload = [op, cfg.name, cfg.model, cfg.decoding(), prompt]
    else:
        payload = [op, cfg.name, cfg.embed_model_id(), prompt]
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ResponseCache:
    """Append-only JSON-lines cache; ``path=None`` keeps it in memory.

    A trailing partial line (crash mid-write) is cut off on open; any other
    unreadable line is reported as corruption.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self._records: dict[str, dict] = {}
        self._dims: dict[str, int] = {}
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            self._load()

    def _load(self):
        raw = self.path.read_bytes()
        lines = raw.split(b"\n")
        good_end = 0
        offset = 0
        for k, line in enumerate(lines):
            end = offset + len(line) + 1
            last = k == len(lines) - 1
            if line.strip():
                try:
                    rec = json.loads(line.decode("utf-8"))
                except (json.JSONDecodeError, UnicodeDecodeError):
                    if last:
                        log.warning("truncating partial trailing cache record in %s", self.path)
                        with open(self.path, "r+b") as fh:
                            fh.truncate(good_end)
                        break
                    raise CacheCorruptionError(f"{self.path}: unreadable record on line {k + 1}")
                self._admit(rec)
            if not last:
                good_end = end
            offset = end

    def _admit(self, rec):
        if rec.get("op") == "embed":
            dim = len(rec["response"])
            have = self._dims.setdefault(rec["model"], dim)
            if have != dim:
                raise CacheCorruptionError(
                    f"embedding dimension {dim} for model {rec['model']!r} conflicts with "
                    f"cached dimension {have}")
        self._records[rec["key"]] = rec

    def get(self, key):
        with self._lock:
            return self._records.get(key)

    def put(self, rec: dict):
        with self._lock:
            if rec["key"] in self._records:
                return
            self._admit(rec)
            if self.path:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
                    fh.flush()

    def __len__(self):
        return len(self._records)


class RateLimiter:
    """Sliding 60-second window admitting at most ``rpm`` requests."""

    def __init__(self, rpm: int, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rpm <= 0:
            raise ConfigurationError("rate budget must be positive")
        self.rpm = rpm
        self.clock = clock
        self.sleep = sleep
        self._stamps: collections.deque[float] = collections.deque()
        self._lock = threading.Lock()

    def _prune(self, now):
        while self._stamps and now - self._stamps[0] >= WINDOW_SECONDS:
            self._stamps.popleft()

    def acquire(self, block: bool = True):
        while True:
            with self._lock:
                now = self.clock()
                self._prune(now)
                if len(self._stamps) < self.rpm:
                    self._stamps.append(now)
                    return
                wait = self._stamps[0] + WINDOW_SECONDS - now
            if not block:
                raise ThrottledError(f"rate budget of {self.rpm}/min exhausted", retry_after=wait)
            self.sleep(wait)


def _seeded_vector(text: str, dim: int) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")
    return np.random.default_rng(seed).standard_normal(dim)


def _ngram_vector(text: str, dim: int) -> np.ndarray:
    words = [w.rstrip("s") if len(w) > 3 else w for w in re.findall(r"[a-z0-9]+", text.lower())]
    feats = words + [a + " " + b for a, b in zip(words, words[1:])]
    vec = np.zeros(dim)
    for f in feats:
        h = hashlib.sha256(f.encode("utf-8")).digest()
        idx = int.from_bytes(h[:4], "little") % dim
        vec[idx] += 1.0 if h[4] & 1 else -1.0
    if not vec.any():
        return _seeded_vector(text, dim)
    return vec


def _truncate_tokens(text: str, max_tokens: int) -> str:
    matches = list(re.finditer(r"\S+", text))
    if len(matches) <= max_tokens:
        return text
    return text[:matches[max_tokens - 1].end()]


class MockBackend:
    def complete(self, prompt, cfg):
        return _truncate_tokens(cfg.mock.answer(prompt), cfg.max_tokens), None

    def embed(self, text, cfg):
        if cfg.mock.embed_mode == "ngram":
            return _ngram_vector(text, cfg.mock.embed_dim)
        return _seeded_vector(text, cfg.mock.embed_dim)


class HttpBackend:
    """OpenAI-compatible ``/chat/completions`` and ``/embeddings`` client."""

    def __init__(self, cfg: ProviderConfig, transport=None):
        import httpx

        key = os.environ.get(cfg.credential_env)
        if not key:
            raise ConfigurationError(f"credential variable {cfg.credential_env} is not set")
        self._httpx = httpx
        self.client = httpx.Client(base_url=cfg.base_url.rstrip("/") + "/",
                                   timeout=cfg.timeout, transport=transport,
                                   headers={"Authorization": f"Bearer {key}"})

    def _post(self, route, body):
        httpx = self._httpx
        try:
            resp = self.client.post(route, json=body)
        except httpx.HTTPError as exc:
            raise _Retryable(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise _Retryable(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        return resp.json()

    def complete(self, prompt, cfg):
        body = {"model": cfg.model, "messages": [{"role": "user", "content": prompt}],
                "temperature": cfg.temperature, "max_tokens": cfg.max_tokens, "n": 1}
        if cfg.stop:
            body["stop"] = list(cfg.stop)
        data = self._post("chat/completions", body)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise TransportError(f"malformed completion response: {str(data)[:200]}") from None
        return text or "", data.get("usage")

    def embed(self, text, cfg):
        data = self._post("embeddings", {"model": cfg.embed_model_id(), "input": text})
        try:
            return np.asarray(data["data"][0]["embedding"], dtype=np.float64)
        except (KeyError, IndexError, TypeError):
            raise TransportError(f"malformed embedding response: {str(data)[:200]}") from None


class _Retryable(Exception):
    pass


class Gateway:
    """Cached, rate-limited, retrying access to one provider.

    ``network_calls`` counts requests that reached the backend.
    """

    def __init__(self, cfg: ProviderConfig, cache: ResponseCache | None = None,
                 clock=time.monotonic, sleep=time.sleep, wallclock=time.time,
                 transport=None, block_on_throttle: bool = True, backoff: float = 0.5):
        self.cfg = cfg
        self.cache = cache if cache is not None else ResponseCache()
        self.limiter = RateLimiter(cfg.rpm, clock, sleep)
        self.sleep = sleep
        self.wallclock = wallclock
        self.block_on_throttle = block_on_throttle
        self.backoff = backoff
        self.network_calls = 0
        self._transport = transport
        self._backend = None
        self._inflight: dict[str, threading.Event] = {}
        self._lock = threading.Lock()

    @property
    def backend(self):
        if self._backend is None:
            self._backend = MockBackend() if self.cfg.kind == "mock" else \
                HttpBackend(self.cfg, self._transport)
        return self._backend

    def _fetch(self, key, op, text, call):
        while True:
            rec = self.cache.get(key)
            if rec is not None:
                return rec
            with self._lock:
                ev = self._inflight.get(key)
                owner = ev is None
                if owner:
                    ev = self._inflight[key] = threading.Event()
            if not owner:
                ev.wait()
                continue
            try:
                response, usage = self._with_retries(call, text)
                rec = {"key": key, "op": op, "prompt": text, "response": response,
                       "model": self.cfg.model if op == "complete" else self.cfg.embed_model_id(),
                       "timestamp": self.wallclock(), "usage": usage}
                self.cache.put(rec)
                return rec
            finally:
                with self._lock:
                    del self._inflight[key]
                ev.set()

    def _with_retries(self, call, text):
        attempt = 0
        while True:
            self.limiter.acquire(block=self.block_on_throttle)
            self.network_calls += 1
            try:
                return call(text)
            except _Retryable as exc:
                if attempt >= self.cfg.max_retries:
                    raise TransportError(f"giving up after {attempt + 1} attempts: {exc}") from exc
                self.sleep(self.backoff * (2 ** attempt))
                attempt += 1

    def complete(self, prompt: str) -> str:
        key = cache_key(self.cfg, prompt, "complete")
        rec = self._fetch(key, "complete", prompt,
                          lambda p: self.backend.complete(p, self.cfg))
        return rec["response"]

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise InputError("cannot embed empty text")
        key = cache_key(self.cfg, text, "embed")

        def call(t):
            vec = np.asarray(self.backend.embed(t, self.cfg), dtype=np.float64)
            norm = np.linalg.norm(vec)
            if not np.isfinite(norm) or norm == 0.0:
                raise TransportError("provider returned a zero or non-finite embedding")
            return [float(x) for x in vec / norm], None

        rec = self._fetch(key, "embed", text, call)
        return np.asarray(rec["response"], dtype=np.float64)
