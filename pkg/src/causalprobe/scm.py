"""Exact inference for finite-domain acyclic structural causal models.

Mechanisms are stored as lookup tables over their declared parents, so every
model built from Python callables is tabulated once at construction. All
probabilities come from exhaustive enumeration of the exogenous product
space; no sampling is ever performed.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import _accel
from .errors import (CapacityError, InputError, StructuralError,
                     UndefinedConditionalError, UnsupportedGraphError)
from .graphs import CausalGraph, EdgeState

DEFAULT_ENUMERATION_CAP = 1 << 24
PROB_TOL = 1e-12


@dataclass(frozen=True)
class Mechanism:
    """Structural assignment as a table over the parents' joint domain.

    ``outputs`` is row-major over the parent domains, last parent fastest.
    """
    parents: tuple[str, ...]
    outputs: tuple

    def evaluate(self, parent_values: Sequence, domains: Mapping[str, tuple]):
        flat = 0
        for p, v in zip(self.parents, parent_values):
            flat = flat * len(domains[p]) + domains[p].index(v)
        return self.outputs[flat]


@dataclass(frozen=True)
class StructuralCausalModel:
    endogenous: tuple[str, ...]
    exogenous: tuple[str, ...]
    domains: dict[str, tuple]
    mechanisms: dict[str, Mechanism]
    exogenous_dist: dict[str, tuple[float, ...]]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        endo, exo = tuple(self.endogenous), tuple(self.exogenous)
        object.__setattr__(self, "endogenous", endo)
        object.__setattr__(self, "exogenous", exo)
        for group, label in ((endo, "endogenous"), (exo, "exogenous")):
            if len(set(group)) != len(group):
                raise InputError(f"duplicate {label} names in {group}")
        overlap = set(endo) & set(exo)
        if overlap:
            raise InputError(f"endogenous and exogenous names overlap: {sorted(overlap)}")
        declared = set(endo) | set(exo)
        for v in declared:
            dom = self.domains.get(v)
            if not dom:
                raise InputError(f"variable {v!r} has no (or an empty) domain")
            if len(set(dom)) != len(dom):
                raise InputError(f"domain of {v!r} has repeated values")
        if set(self.mechanisms) != set(endo):
            missing = set(endo) - set(self.mechanisms)
            extra = set(self.mechanisms) - set(endo)
            raise InputError(f"mechanisms must cover endogenous variables exactly "
                             f"(missing {sorted(missing)}, unexpected {sorted(extra)})")
        for v, mech in self.mechanisms.items():
            for p in mech.parents:
                if p not in declared:
                    raise InputError(f"mechanism of {v!r} uses undeclared variable {p!r}")
                if p == v:
                    raise StructuralError(f"{v!r} lists itself as a parent", cycle=[v, v])
            size = math.prod(len(self.domains[p]) for p in mech.parents)
            if len(mech.outputs) != size:
                raise InputError(f"mechanism of {v!r} has {len(mech.outputs)} entries, "
                                 f"expected {size}")
            dom = set(self.domains[v])
            for out in mech.outputs:
                if out not in dom:
                    raise InputError(f"mechanism of {v!r} produces {out!r}, "
                                     f"outside its domain")
        if set(self.exogenous_dist) != set(exo):
            raise InputError("exogenous distributions must cover exogenous variables exactly")
        for e in exo:
            probs = self.exogenous_dist[e]
            if len(probs) != len(self.domains[e]):
                raise InputError(f"probability table of {e!r} does not match its domain")
            if any(p < 0 for p in probs):
                raise InputError(f"negative probability in table of {e!r}")
            if abs(math.fsum(probs) - 1.0) > PROB_TOL:
                raise InputError(f"probability table of {e!r} sums to {math.fsum(probs)!r}")
        self.topological_order()

    def endogenous_parents(self, v: str) -> tuple[str, ...]:
        return tuple(p for p in self.mechanisms[v].parents if p in self.mechanisms)

    def exogenous_parents(self, v: str) -> tuple[str, ...]:
        return tuple(p for p in self.mechanisms[v].parents if p not in self.mechanisms)

    def topological_order(self) -> list[str]:
        """Endogenous variables ordered parents-first; ties keep declared order."""
        remaining = list(self.endogenous)
        done: set[str] = set()
        order = []
        while remaining:
            for v in remaining:
                if all(p in done for p in self.endogenous_parents(v)):
                    order.append(v)
                    done.add(v)
                    remaining.remove(v)
                    break
            else:
                cycle = _cycle_in(remaining, self.endogenous_parents)
                raise StructuralError(f"structural cycle {' -> '.join(cycle)}", cycle=cycle)
        return order


def _cycle_in(nodes, parents_of):
    # walk parents until a repeat; every node in `nodes` has a parent in `nodes`
    start = nodes[0]
    path = [start]
    while True:
        nxt = next(p for p in parents_of(path[-1]) if p in nodes)
        if nxt in path:
            cyc = path[path.index(nxt):] + [nxt]
            return list(reversed(cyc))
        path.append(nxt)


# construction helpers --------------------------------------------------------

def bernoulli(p: float) -> dict:
    return {0: 1.0 - p, 1: p}


def tabulate(parents: Sequence[str], fn: Callable | Mapping | Any,
             domains: Mapping[str, tuple]) -> Mechanism:
    """Turn a callable, a mapping, or a constant into a :class:`Mechanism`.

    A mapping is keyed by tuples of parent values (a bare value is accepted
    for a single parent).
    """
    parents = tuple(parents)
    outs = []
    for combo in itertools.product(*(domains[p] for p in parents)):
        if callable(fn):
            out = fn(*combo)
        elif isinstance(fn, Mapping):
            key = combo if len(combo) != 1 else combo[0]
            if key in fn:
                out = fn[key]
            elif combo in fn:
                out = fn[combo]
            else:
                raise InputError(f"lookup table has no entry for parents {combo!r}")
        else:
            if parents:
                raise InputError("a constant assignment cannot declare parents")
            out = fn
        outs.append(out)
    return Mechanism(parents, tuple(outs))


def make_scm(endogenous: Mapping[str, Sequence], exogenous: Mapping[str, Mapping],
             assignments: Mapping[str, tuple], name: str = "") -> StructuralCausalModel:
    """Build a model from plain Python values.

    ``endogenous`` maps names to domains, ``exogenous`` maps names to
    ``{value: probability}`` tables and ``assignments`` maps each endogenous
    name to ``(parents, fn)`` as accepted by :func:`tabulate`.
    """
    domains: dict[str, tuple] = {v: tuple(d) for v, d in endogenous.items()}
    dist = {}
    for e, table in exogenous.items():
        domains[e] = tuple(table)
        dist[e] = tuple(float(table[k]) for k in table)
    mechs = {}
    for v, spec in assignments.items():
        parents, fn = spec
        for p in parents:
            if p not in domains:
                raise InputError(f"mechanism of {v!r} uses undeclared variable {p!r}")
        mechs[v] = tabulate(parents, fn, domains)
    return StructuralCausalModel(tuple(endogenous), tuple(exogenous), domains, mechs, dist,
                                 name=name)


# graph ---------------------------------------------------------------------

def nonessential_parents(scm: StructuralCausalModel) -> dict[str, tuple[str, ...]]:
    """Declared parents whose value never changes the assignment's output.

    Exhaustive over the finite parent domains: parent ``k`` is non-essential
    for ``v`` iff every slice of the table along ``k`` is identical.
    """
    out = {}
    for v in scm.endogenous:
        mech = scm.mechanisms[v]
        if not mech.parents:
            out[v] = ()
            continue
        code = {val: i for i, val in enumerate(scm.domains[v])}
        arr = np.array([code[o] for o in mech.outputs]).reshape(
            [len(scm.domains[p]) for p in mech.parents])
        idle = []
        for ax, p in enumerate(mech.parents):
            first = np.take(arr, [0], axis=ax)
            if np.all(arr == first):
                idle.append(p)
        out[v] = tuple(idle)
    return out


def confounded_pairs(scm: StructuralCausalModel) -> list[tuple[str, str]]:
    """Endogenous pairs sharing at least one declared exogenous parent."""
    pairs = []
    for a, b in itertools.combinations(scm.endogenous, 2):
        if set(scm.exogenous_parents(a)) & set(scm.exogenous_parents(b)):
            pairs.append((a, b))
    return pairs


def induced_graph(scm: StructuralCausalModel, audit: bool = False) -> CausalGraph:
    """The causal graph implied by the declared parent lists.

    Endogenous parents give directed edges and shared exogenous parents give
    symmetric edges. A pair that is both directed and confounded keeps the
    directed state; :func:`confounded_pairs` still reports it. With ``audit``
    the non-essential parents found by :func:`nonessential_parents` are
    dropped first.
    """
    idle = nonessential_parents(scm) if audit else {v: () for v in scm.endogenous}
    directed = []
    for v in scm.endogenous:
        for p in scm.endogenous_parents(v):
            if p not in idle[v]:
                directed.append((p, v))
    exo_of = {v: {e for e in scm.exogenous_parents(v) if e not in idle[v]}
              for v in scm.endogenous}
    symmetric = []
    linked = {frozenset(e) for e in directed}
    for a, b in itertools.combinations(scm.endogenous, 2):
        if exo_of[a] & exo_of[b] and frozenset((a, b)) not in linked:
            symmetric.append((a, b))
    return CausalGraph.from_edges(scm.endogenous, directed, symmetric)


# distributions -----------------------------------------------------------------

@dataclass(frozen=True)
class JointDistribution:
    """Exact probability table over named finite variables.

    ``probs`` has one axis per variable, in the order of ``variables``.
    """
    variables: tuple[str, ...]
    domains: tuple[tuple, ...]
    probs: np.ndarray = field(compare=False)

    def __post_init__(self):
        shape = tuple(len(d) for d in self.domains)
        if tuple(self.probs.shape) != shape:
            raise InputError(f"table shape {self.probs.shape} does not match domains {shape}")

    def __eq__(self, other):
        return (isinstance(other, JointDistribution) and self.variables == other.variables
                and self.domains == other.domains and np.array_equal(self.probs, other.probs))

    def axis(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise InputError(f"variable {var!r} not in distribution") from None

    def code(self, var: str, value) -> int:
        dom = self.domains[self.axis(var)]
        try:
            return dom.index(value)
        except ValueError:
            raise InputError(f"value {value!r} not in domain of {var!r}") from None

    def _event_mask(self, event: Mapping) -> tuple:
        index: list = [slice(None)] * len(self.variables)
        for var, val in event.items():
            index[self.axis(var)] = self.code(var, val)
        return tuple(index)

    def prob(self, event: Mapping | None = None) -> float:
        """P(event) for a conjunction of ``variable = value`` assignments."""
        if not event:
            return float(self.probs.sum())
        return float(self.probs[self._event_mask(event)].sum())

    def conditional(self, event: Mapping, given: Mapping) -> float:
        den = self.prob(given)
        if den <= 0.0:
            raise UndefinedConditionalError(f"conditioning event {dict(given)} has probability 0")
        joint = dict(given)
        for var, val in event.items():
            if var in joint and joint[var] != val:
                return 0.0
            joint[var] = val
        return self.prob(joint) / den

    def marginal(self, variables: Sequence[str]) -> "JointDistribution":
        axes = [self.axis(v) for v in variables]
        drop = tuple(i for i in range(len(self.variables)) if i not in axes)
        reduced = self.probs.sum(axis=drop) if drop else self.probs
        kept = [i for i in range(len(self.variables)) if i in axes]
        perm = [kept.index(a) for a in axes]
        return JointDistribution(tuple(variables), tuple(self.domains[a] for a in axes),
                                 np.transpose(reduced, perm))

    def rows(self):
        """Yield ``(assignment tuple, probability)`` in row-major order."""
        for combo in itertools.product(*(range(len(d)) for d in self.domains)):
            yield tuple(d[i] for d, i in zip(self.domains, combo)), float(self.probs[combo])


def _compile(scm: StructuralCausalModel, cap: int):
    """Lower the model to integer arrays for the enumeration kernel."""
    used = []
    for v in scm.endogenous:
        for e in scm.exogenous_parents(v):
            if e not in used:
                used.append(e)
    exo = [e for e in scm.exogenous if e in used]
    total = math.prod(len(scm.domains[e]) for e in exo)
    if total > cap:
        raise CapacityError(f"{total} exogenous configurations exceed the enumeration cap "
                            f"{cap}; approximate the model by sampling instead")
    k = len(exo)
    slot = {e: j for j, e in enumerate(exo)}
    slot.update({v: k + i for i, v in enumerate(scm.endogenous)})
    exo_sizes = np.array([len(scm.domains[e]) for e in exo], dtype=np.int64)
    exo_probs = np.array([p for e in exo for p in scm.exogenous_dist[e]], dtype=np.float64)
    exo_offsets = np.zeros(k, dtype=np.int64)
    if k:
        exo_offsets[1:] = np.cumsum(exo_sizes)[:-1]
    idx_of = {v: i for i, v in enumerate(scm.endogenous)}
    order = np.array([idx_of[v] for v in scm.topological_order()], dtype=np.int64)
    par_idx, par_stride, par_ptr, tab, tab_ptr = [], [], [0], [], []
    for v in scm.endogenous:
        mech = scm.mechanisms[v]
        sizes = [len(scm.domains[p]) for p in mech.parents]
        stride = 1
        strides = []
        for s in reversed(sizes):
            strides.append(stride)
            stride *= s
        strides.reverse()
        par_idx.extend(slot[p] for p in mech.parents)
        par_stride.extend(strides)
        par_ptr.append(len(par_idx))
        tab_ptr.append(len(tab))
        code = {val: i for i, val in enumerate(scm.domains[v])}
        tab.extend(code[o] for o in mech.outputs)
    out_sizes = [len(scm.domains[v]) for v in scm.endogenous]
    out_stride = np.ones(len(out_sizes), dtype=np.int64)
    for i in range(len(out_sizes) - 2, -1, -1):
        out_stride[i] = out_stride[i + 1] * out_sizes[i + 1]
    return dict(
        exo_sizes=exo_sizes, exo_probs=exo_probs, exo_offsets=exo_offsets, order=order,
        par_idx=np.array(par_idx, dtype=np.int64), par_ptr=np.array(par_ptr, dtype=np.int64),
        par_stride=np.array(par_stride, dtype=np.int64), tab=np.array(tab, dtype=np.int64),
        tab_ptr=np.array(tab_ptr, dtype=np.int64), out_stride=out_stride,
        out_size=int(math.prod(out_sizes)),
    ), out_sizes


def joint_distribution(scm: StructuralCausalModel, cap: int = DEFAULT_ENUMERATION_CAP,
                       backend=None) -> JointDistribution:
    """Exact joint over the endogenous variables by full enumeration."""
    arrays, shape = _compile(scm, cap)
    kern = backend or _accel.enumeration_kernels(int(np.prod(arrays["exo_sizes"])))
    flat = kern.enumerate_joint(**arrays)
    return JointDistribution(scm.endogenous, tuple(scm.domains[v] for v in scm.endogenous),
                             np.asarray(flat).reshape(shape))


def intervene(scm: StructuralCausalModel, assignments: Mapping[str, Any]) -> StructuralCausalModel:
    """Replace the mechanisms of ``assignments`` by constants (do-operator)."""
    mechs = dict(scm.mechanisms)
    for var, val in assignments.items():
        if var not in scm.mechanisms:
            raise InputError(f"cannot intervene on {var!r}: not an endogenous variable")
        if val not in scm.domains[var]:
            raise InputError(f"value {val!r} outside the domain of {var!r}")
        mechs[var] = Mechanism((), (val,))
    return StructuralCausalModel(scm.endogenous, scm.exogenous, dict(scm.domains), mechs,
                                 dict(scm.exogenous_dist), name=scm.name)


@dataclass(frozen=True)
class CausalQuery:
    """P(event | conditions) at L1 or P(event_{do(interventions)}) at L2."""
    level: str
    event: Mapping[str, Any]
    conditions: Mapping[str, Any] = field(default_factory=dict)
    interventions: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.level not in ("L1", "L2"):
            raise InputError(f"unsupported query level {self.level!r}")
        if self.level == "L1" and self.interventions:
            raise InputError("L1 queries cannot carry interventions")
        if self.level == "L2" and self.conditions:
            raise InputError("L2 queries here take no conditions")

    @classmethod
    def observational(cls, event, conditions=None):
        return cls("L1", dict(event), dict(conditions or {}))

    @classmethod
    def interventional(cls, event, interventions):
        return cls("L2", dict(event), interventions=dict(interventions))


def _check_vars(scm, names):
    for v in names:
        if v not in scm.mechanisms:
            raise InputError(f"unknown endogenous variable {v!r}")


def answer_query(scm: StructuralCausalModel, q: CausalQuery,
                 cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    _check_vars(scm, list(q.event) + list(q.conditions) + list(q.interventions))
    if q.level == "L1":
        joint = joint_distribution(scm, cap)
        if q.conditions:
            return joint.conditional(q.event, q.conditions)
        return joint.prob(q.event)
    return joint_distribution(intervene(scm, q.interventions), cap).prob(q.event)


def truncated_factorization(graph: CausalGraph, observational: JointDistribution,
                            interventions: Mapping[str, Any]) -> JointDistribution:
    """Post-intervention joint implied by a Markovian DAG and an observational table."""
    if graph.count(EdgeState.SYMMETRIC):
        raise UnsupportedGraphError("truncated factorization needs a graph without "
                                    "symmetric (confounded) edges")
    if set(graph.nodes) != set(observational.variables) or \
            len(graph.nodes) != len(observational.variables):
        raise InputError(f"graph variables {sorted(graph.nodes)} differ from table variables "
                         f"{sorted(observational.variables)}")
    for var, val in interventions.items():
        observational.code(var, val)
    table = observational.marginal(graph.nodes)
    P = table.probs
    n = len(graph.nodes)
    post = np.ones(P.shape, dtype=np.float64)
    for v in graph.topological_order():
        k = graph.index(v)
        if v in interventions:
            ind = np.zeros(P.shape[k])
            ind[table.code(v, interventions[v])] = 1.0
            shape = [1] * n
            shape[k] = P.shape[k]
            post = post * ind.reshape(shape)
            continue
        pa = [graph.index(p) for p in graph.parents(v)]
        num = P.sum(axis=tuple(a for a in range(n) if a not in pa and a != k), keepdims=True)
        den = P.sum(axis=tuple(a for a in range(n) if a not in pa), keepdims=True)
        mass = post.sum(axis=tuple(a for a in range(n) if a not in pa), keepdims=True)
        if np.any((den <= 0.0) & (mass > 0.0)):
            raise UndefinedConditionalError(
                f"P({v} | {', '.join(graph.parents(v)) or '()'}) is undefined at a parent "
                f"configuration reachable under the intervention (positivity violated)")
        cond = np.divide(num, den, out=np.zeros(np.broadcast_shapes(num.shape, den.shape)),
                         where=den > 0.0)
        post = post * cond
    return JointDistribution(table.variables, table.domains, post)


def answer_l2_via_meta(graph: CausalGraph, observational: JointDistribution,
                       q: CausalQuery) -> float:
    """Answer an interventional query from observational data plus a graph.

    The graph plays the role of the meta-level knowledge: it decides which
    factors the intervention removes.
    """
    if q.conditions:
        raise InputError("conditional queries are not supported here")
    for v in list(q.event) + list(q.interventions):
        if v not in graph.nodes:
            raise InputError(f"unknown variable {v!r}")
    post = truncated_factorization(graph, observational, q.interventions)
    return post.prob(q.event)


# meta models ------------------------------------------------------------------

def binary_matrix_values(rows: int, cols: int) -> tuple[str, ...]:
    """All 0/1 matrices as strings like ``"000/000/110"`` (rows joined by '/')."""
    out = []
    for bits in itertools.product("01", repeat=rows * cols):
        s = "".join(bits)
        out.append("/".join(s[r * cols:(r + 1) * cols] for r in range(rows)))
    return tuple(out)


def decode_adjacency(value: str, labels: Sequence[str]) -> CausalGraph:
    """Graph from an adjacency string; cell (i, j) = 1 encodes ``i -> j``."""
    rows = value.split("/")
    n = len(labels)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise InputError(f"adjacency {value!r} is not {n}x{n}")
    adj = np.array([[c == "1" for c in r] for r in rows], dtype=bool)
    return CausalGraph.from_adjacency(labels, adj)


def graph_from_meta(meta: StructuralCausalModel, variable: str,
                    labels: Sequence[str]) -> CausalGraph:
    """Read the graph a meta model encodes in its observational distribution.

    The observational law of ``variable`` must be a point mass on an
    adjacency string over ``labels``.
    """
    joint = joint_distribution(meta).marginal([variable])
    support = [(val, p) for (val,), p in joint.rows() if p > PROB_TOL]
    if len(support) != 1 or abs(support[0][1] - 1.0) > PROB_TOL:
        raise InputError(f"{variable!r} is not deterministic under the meta model")
    return decode_adjacency(support[0][0], labels)


# file format -----------------------------------------------------------------

def _parse_domain(spec, where):
    if isinstance(spec, list):
        return tuple(spec)
    if isinstance(spec, dict) and set(spec) == {"binary_matrices"}:
        r, c = spec["binary_matrices"]
        return binary_matrix_values(int(r), int(c))
    raise InputError(f"{where}: domain must be a list or {{'binary_matrices': [r, c]}}")


def _parse_assignment(var, spec, domains):
    where = f"assignment of {var!r}"
    if not isinstance(spec, dict) or len(spec) != 1:
        raise InputError(f"{where}: expected exactly one of constant/table/affine")
    (kind, body), = spec.items()
    if kind == "constant":
        return Mechanism((), (body,))
    if kind == "table":
        parents = tuple(body["parents"])
        rows = body["rows"]
        mapping = {}
        for row in rows:
            if len(row) != len(parents) + 1:
                raise InputError(f"{where}: row {row!r} needs {len(parents) + 1} entries")
            key = tuple(row[:-1])
            if key in mapping and mapping[key] != row[-1]:
                raise InputError(f"{where}: conflicting rows for {key!r}")
            mapping[key] = row[-1]
        for p in parents:
            if p not in domains:
                raise InputError(f"{where}: undeclared parent {p!r}")
        return tabulate(parents, lambda *vals: _lookup(mapping, vals, where), domains)
    if kind == "affine":
        coefs = body.get("coefficients", {})
        intercept = body.get("intercept", 0)
        parents = tuple(coefs)
        for p in parents:
            if p not in domains:
                raise InputError(f"{where}: undeclared parent {p!r}")
        return tabulate(parents, lambda *vals: intercept + sum(
            coefs[p] * x for p, x in zip(parents, vals)), domains)
    raise InputError(f"{where}: unknown assignment kind {kind!r}")


def _lookup(mapping, vals, where):
    try:
        return mapping[tuple(vals)]
    except KeyError:
        raise InputError(f"{where}: table is not total, missing parents {vals!r}") from None


def scm_from_dict(doc: Mapping) -> StructuralCausalModel:
    allowed = {"name", "description", "endogenous", "exogenous"}
    unknown = set(doc) - allowed
    if unknown:
        raise InputError(f"unknown top-level fields {sorted(unknown)}")
    domains: dict[str, tuple] = {}
    dist = {}
    for e, spec in doc.get("exogenous", {}).items():
        domains[e] = _parse_domain(spec["domain"], f"exogenous {e!r}")
        probs = spec.get("probs")
        if probs is None:
            probs = [1.0 / len(domains[e])] * len(domains[e])
        dist[e] = tuple(float(p) for p in probs)
    endo_specs = doc.get("endogenous", {})
    for v, spec in endo_specs.items():
        if v in domains:
            raise InputError(f"{v!r} is declared both endogenous and exogenous")
        domains[v] = _parse_domain(spec["domain"], f"endogenous {v!r}")
    mechs = {v: _parse_assignment(v, spec["assign"], domains) for v, spec in endo_specs.items()}
    return StructuralCausalModel(tuple(endo_specs), tuple(doc.get("exogenous", {})), domains,
                                 mechs, dist, name=doc.get("name", ""))


def load_scm(path) -> StructuralCausalModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scm_from_dict(doc)


def scm_to_dict(scm: StructuralCausalModel) -> dict:
    """Serialize with every assignment written as an explicit table."""
    def dom(v):
        return list(scm.domains[v])
    endo = {}
    for v in scm.endogenous:
        mech = scm.mechanisms[v]
        if not mech.parents:
            assign = {"constant": mech.outputs[0]}
        else:
            combos = itertools.product(*(scm.domains[p] for p in mech.parents))
            assign = {"table": {"parents": list(mech.parents),
                                "rows": [list(c) + [o] for c, o in zip(combos, mech.outputs)]}}
        endo[v] = {"domain": dom(v), "assign": assign}
    exo = {e: {"domain": dom(e), "probs": list(scm.exogenous_dist[e])} for e in scm.exogenous}
    return {"name": scm.name, "endogenous": endo, "exogenous": exo}


FIXTURE_DIR = Path(__file__).parent / "data" / "scm"


def load_fixture(name: str) -> StructuralCausalModel:
    return load_scm(FIXTURE_DIR / f"{name}.json")
