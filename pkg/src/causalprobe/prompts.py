"""Prompt families: pairwise query templates, causal chains, CoT prefixes and
question banks."""
from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import InputError

DATA_DIR = Path(__file__).parent / "data"


class Symmetry(enum.Enum):
    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"


@dataclass(frozen=True)
class QueryTemplate:
    id: int
    pattern: str
    symmetry: Symmetry
    declarative: str
    name: str


TEMPLATES = (
    QueryTemplate(1, "Are {X} and {Y} causally related?", Symmetry.SYMMETRIC,
                  "{X} and {Y} are causally related.", "related"),
    QueryTemplate(2, "Is there a causal connection between {X} and {Y}?", Symmetry.SYMMETRIC,
                  "There is a causal connection between {X} and {Y}.", "connection"),
    QueryTemplate(3, "Is there a causality between {X} and {Y}?", Symmetry.SYMMETRIC,
                  "There is a causality between {X} and {Y}.", "causality"),
    QueryTemplate(4, "Does {X} cause {Y}?", Symmetry.ASYMMETRIC,
                  "{X} {causes} {Y}.", "cause"),
    QueryTemplate(5, "Does {X} influence {Y}?", Symmetry.ASYMMETRIC,
                  "{X} {influences} {Y}.", "influence"),
)
SYMMETRIC_IDS = tuple(t.id for t in TEMPLATES if t.symmetry is Symmetry.SYMMETRIC)
ASYMMETRIC_IDS = tuple(t.id for t in TEMPLATES if t.symmetry is Symmetry.ASYMMETRIC)


def get_template(template) -> QueryTemplate:
    if isinstance(template, QueryTemplate):
        return template
    for t in TEMPLATES:
        if t.id == template:
            return t
    raise InputError(f"no template with id {template!r}")


def _capitalize(text: str) -> str:
    return text[:1].upper() + text[1:]


def instantiate_pair(template, cause: str, effect: str) -> str:
    """Question for the ordered pair; ``cause`` fills X and ``effect`` Y."""
    t = get_template(template)
    if not cause or not effect:
        raise InputError("variable names must be non-empty")
    return _capitalize(t.pattern.format(X=cause, Y=effect))


def _looks_plural(phrase: str) -> bool:
    # head noun: the word before " of " if present, else the last word
    head = phrase.split(" of ")[0].split()[-1] if " of " in phrase else phrase.split()[-1]
    head = head.lower()
    return head.endswith("s") and not head.endswith(("ss", "us", "is"))


def declarative_statement(template, cause: str, effect: str) -> str:
    """Declarative sentence for a template, e.g. ``"Rain causes floods."``.

    Verbs agree with a plural-looking subject ("Floods cause rain.").
    """
    t = get_template(template)
    if not cause or not effect:
        raise InputError("variable names must be non-empty")
    plural = _looks_plural(cause)
    return _capitalize(t.declarative.format(
        X=cause, Y=effect,
        causes="cause" if plural else "causes",
        influences="influence" if plural else "influences"))


# causal chains ---------------------------------------------------------------

STANDARD_LETTERS = "ABCDEFGHIJ"
# letters appearing in the CoT exemplars are never used for randomized names
COT_LETTERS = frozenset("MVWXYZ")
RANDOM_LETTERS = tuple(c for c in "ABCDEFGHIJKLMNOPQRSTUVWXYZ" if c not in COT_LETTERS)
MAX_CHAIN = 10


@dataclass(frozen=True)
class ChainSpec:
    """A chain X1 -> ... -> Xn and one question "Does Xu cause Xv?".

    ``question`` holds 0-based chain positions. ``shuffle_order`` permutes the
    premise sentences and ``random_names`` draws letters without replacement;
    both use ``seed``. ``names`` overrides the letters entirely (natural word
    chains).
    """
    length: int
    question: tuple[int, int] | None = None
    shuffle_order: bool = False
    random_names: bool = False
    seed: int = 0
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if not 2 <= self.length <= MAX_CHAIN:
            raise InputError(f"chain length must be in [2, {MAX_CHAIN}], got {self.length}")
        q = self.question if self.question is not None else (0, self.length - 1)
        q = (int(q[0]), int(q[1]))
        object.__setattr__(self, "question", q)
        if not all(0 <= i < self.length for i in q) or q[0] == q[1]:
            raise InputError(f"question {q} must name two distinct chain positions")
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != self.length or len(set(names)) != self.length:
                raise InputError("names must give one distinct name per chain position")
            object.__setattr__(self, "names", names)

    @classmethod
    def standard(cls, n):
        return cls(n)

    @classmethod
    def subchain(cls, n, start, end):
        return cls(n, (start, end))

    @classmethod
    def randomized_order(cls, n, seed, question=None):
        return cls(n, question, shuffle_order=True, seed=seed)

    @classmethod
    def randomized_names(cls, n, seed, question=None):
        return cls(n, question, random_names=True, seed=seed)

    @property
    def variant(self) -> str:
        if self.shuffle_order or self.random_names:
            return "randomized"
        if self.question != (0, self.length - 1):
            return "subchain"
        return "standard"


@dataclass(frozen=True)
class ChainPrompt:
    text: str
    gold: bool
    names: tuple[str, ...]
    premises: tuple[tuple[str, str], ...]
    spec: ChainSpec


def chain_names(spec: ChainSpec) -> tuple[str, ...]:
    if spec.names is not None:
        return spec.names
    if spec.random_names:
        rng = random.Random(f"names:{spec.seed}")
        return tuple(rng.sample(RANDOM_LETTERS, spec.length))
    return tuple(STANDARD_LETTERS[:spec.length])


def join_clauses(clauses: Sequence[str]) -> str:
    """``"a"``, ``"a and b"``, ``"a, b and c"``."""
    if len(clauses) == 1:
        return clauses[0]
    return ", ".join(clauses[:-1]) + " and " + clauses[-1]


def reachable(premises: Sequence[tuple[str, str]], source: str, target: str) -> bool:
    """Directed path from ``source`` to ``target`` in the premise graph."""
    succ: dict[str, list[str]] = {}
    for a, b in premises:
        succ.setdefault(a, []).append(b)
    seen, stack = {source}, [source]
    while stack:
        v = stack.pop()
        for w in succ.get(v, ()):
            if w == target:
                return True
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def chain_prompt(spec: ChainSpec) -> ChainPrompt:
    names = chain_names(spec)
    premises = [(names[i], names[i + 1]) for i in range(spec.length - 1)]
    if spec.shuffle_order:
        random.Random(f"order:{spec.seed}").shuffle(premises)
    u, v = names[spec.question[0]], names[spec.question[1]]
    clauses = [f"{a} causes {b}" for a, b in premises]
    text = f"If {join_clauses(clauses)}. Does {u} cause {v}?"
    return ChainPrompt(text, reachable(premises, u, v), names, tuple(premises), spec)


def default_chain_suite(seed: int = 0) -> list[ChainSpec]:
    """Twenty chain questions: n = 2..10 standard, 4 sub-chains, 7 randomized.

    Fifteen have gold answer yes and five no, so always answering yes
    scores 75%.
    """
    suite = [ChainSpec.standard(n) for n in range(2, 11)]
    suite += [ChainSpec.subchain(5, 1, 4), ChainSpec.subchain(6, 0, 3),
              ChainSpec.subchain(7, 2, 5), ChainSpec.subchain(8, 5, 2)]
    suite += [
        ChainSpec(3, shuffle_order=True, seed=seed),
        ChainSpec(5, (1, 3), random_names=True, seed=seed + 1),
        ChainSpec(6, shuffle_order=True, random_names=True, seed=seed + 2),
        ChainSpec(4, (3, 1), shuffle_order=True, seed=seed + 3),
        ChainSpec(7, (4, 0), random_names=True, seed=seed + 4),
        ChainSpec(8, (6, 2), shuffle_order=True, random_names=True, seed=seed + 5),
        ChainSpec(9, (5, 1), shuffle_order=True, seed=seed + 6),
    ]
    return suite


# chain-of-thought ----------------------------------------------------------------

@dataclass(frozen=True)
class CotBank:
    task: str
    qa_pairs: tuple[tuple[str, str], ...]

    def __len__(self):
        return len(self.qa_pairs)


COT_FILES = {"causal-chains": "causal_chains.txt", "natural-word-chains": "natural_word_chains.txt"}


def parse_cot_text(task: str, text: str) -> CotBank:
    pairs = []
    for block in text.strip().split("\n\n"):
        lines = block.strip().split("\n")
        if len(lines) != 2 or not lines[0].startswith("Q: ") or not lines[1].startswith("A: "):
            raise InputError(f"malformed CoT block in {task!r}: {block!r}")
        pairs.append((lines[0][3:], lines[1][3:]))
    return CotBank(task, tuple(pairs))


def load_cot_bank(task: str) -> CotBank:
    if task not in COT_FILES:
        raise InputError(f"unknown CoT bank {task!r}; choose from {sorted(COT_FILES)}")
    text = (DATA_DIR / "cot" / COT_FILES[task]).read_text(encoding="utf-8")
    return parse_cot_text(task, text)


def cot_prefix(bank: CotBank, k: int) -> str:
    """First ``k`` exemplars as ``Q: ...\\nA: ...\\n`` lines plus a blank line."""
    if not 0 <= k <= len(bank):
        raise InputError(f"CoT length {k} outside [0, {len(bank)}] for bank {bank.task!r}")
    if k == 0:
        return ""
    return "".join(f"Q: {q}\nA: {a}\n" for q, a in bank.qa_pairs[:k]) + "\n"


def with_cot(question: str, bank: CotBank | None, k: int) -> str:
    """Prompt text for ``question`` behind ``k`` exemplars (plain when k is 0)."""
    if bank is None or k == 0:
        if k and bank is None:
            raise InputError("a CoT length was given without a bank")
        return question
    return cot_prefix(bank, k) + f"Q: {question}\nA:"


# question banks --------------------------------------------------------------

GRADINGS = ("auto-yes-no", "manual")


@dataclass(frozen=True)
class BankItem:
    id: str
    prompt: str
    grading: str
    gold: str | None = None
    category: str | None = None


def parse_question_bank(text: str, where: str = "<bank>") -> list[BankItem]:
    if not text.strip():
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    items = doc["items"] if isinstance(doc, dict) else doc
    out, seen = [], set()
    for k, raw in enumerate(items):
        unknown = set(raw) - {"id", "prompt", "grading", "gold", "category"}
        if unknown:
            raise InputError(f"{where}: item {k} has unknown fields {sorted(unknown)}")
        item = BankItem(str(raw["id"]), raw["prompt"], raw.get("grading", "manual"),
                        raw.get("gold"), raw.get("category"))
        if item.id in seen:
            raise InputError(f"{where}: duplicate item id {item.id!r}")
        seen.add(item.id)
        if item.grading not in GRADINGS:
            raise InputError(f"{where}: item {item.id!r} has grading {item.grading!r}")
        if item.gold is not None and item.gold.lower() not in ("yes", "no"):
            raise InputError(f"{where}: item {item.id!r} gold must be yes or no")
        out.append(item)
    return out


def load_question_bank(path) -> list[BankItem]:
    path = Path(path)
    if not path.exists():
        bundled = DATA_DIR / "banks" / f"{path}.json"
        if bundled.exists():
            path = bundled
    return parse_question_bank(path.read_text(encoding="utf-8"), str(path))
