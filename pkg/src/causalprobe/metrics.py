"""Graph comparison and decisiveness metrics.

SID follows the parent-adjustment definition: for every ordered pair (i, j)
the predicted parents of ``i`` are checked as an adjustment set for the
effect of ``i`` on ``j`` in the true DAG, using the generalized adjustment
criterion in its proper-back-door-graph form.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _accel
from .errors import InputError, StructuralError
from .graphs import CausalGraph, EdgeState, orientation_extensions
from .prompts import ASYMMETRIC_IDS, SYMMETRIC_IDS


def _aligned(pred: CausalGraph, truth: CausalGraph) -> CausalGraph:
    if set(pred.nodes) != set(truth.nodes) or len(pred.nodes) != len(truth.nodes):
        raise InputError(f"node sets differ: {sorted(pred.nodes)} vs {sorted(truth.nodes)}")
    return pred if pred.nodes == truth.nodes else pred.reorder(truth.nodes)


def shd(pred: CausalGraph, truth: CausalGraph) -> int:
    """Count of unordered pairs whose states differ (every mismatch costs 1)."""
    pred = _aligned(pred, truth)
    return sum(1 for a, b in zip(pred.states, truth.states) if a is not b)


def _closure(adj: np.ndarray) -> np.ndarray:
    """desc[i, j] true iff a directed path i ->* j exists (i ->* i always)."""
    n = adj.shape[0]
    reach = adj.copy() | np.eye(n, dtype=bool)
    for k in range(n):
        reach |= reach[:, [k]] & reach[[k], :]
    return reach


def sid_directed(pred_adj: np.ndarray, truth_adj: np.ndarray, backend=None) -> int:
    """SID between a directed prediction (parents from ``pred_adj``) and a DAG."""
    kern = backend or _accel.kernels
    n = truth_adj.shape[0]
    truth_adj = np.ascontiguousarray(truth_adj, dtype=np.bool_)
    desc = _closure(truth_adj)
    mistakes = 0
    for i in range(n):
        zmask = np.ascontiguousarray(pred_adj[:, i], dtype=np.bool_)
        for j in range(n):
            if j == i:
                continue
            if zmask[j]:
                # the prediction claims j is a parent, hence unaffected by i
                if desc[i, j]:
                    mistakes += 1
                continue
            if desc[i, j]:
                on_causal = desc[i] & desc[:, j]
                on_causal[i] = False
                forbidden = desc[on_causal].any(axis=0)
                if (zmask & forbidden).any():
                    mistakes += 1
                    continue
                pbd = truth_adj.copy()
                pbd[i, on_causal] = False
            else:
                pbd = truth_adj
            if kern.dconnected(pbd, i, zmask)[j]:
                mistakes += 1
    return mistakes


@dataclass(frozen=True)
class SIDResult:
    min: float
    mean: float
    max: float
    extensions: int


def sid(pred: CausalGraph, truth: CausalGraph, backend=None) -> SIDResult:
    """SID over the orientation extensions of ``pred``.

    Symmetric predicted edges are resolved in every acyclic way; when the
    directed part already has a cycle all orientations are used, since SID
    only reads parent sets.
    """
    if not truth.is_dag():
        raise StructuralError("SID needs a DAG as ground truth")
    pred = _aligned(pred, truth)
    exts = orientation_extensions(pred) or orientation_extensions(pred, acyclic_only=False)
    tadj = truth.directed_adjacency()
    vals = [sid_directed(e.directed_adjacency(), tadj, backend) for e in exts]
    return SIDResult(float(min(vals)), float(statistics.fmean(vals)), float(max(vals)), len(vals))


def _skeleton(g: CausalGraph) -> set[int]:
    return {k for k, s in enumerate(g.states) if s is not EdgeState.ABSENT}


def f1(pred: CausalGraph, truth: CausalGraph) -> float:
    """F1 of skeleton presence; 0.0 whenever there is no true positive."""
    pred = _aligned(pred, truth)
    p, t = _skeleton(pred), _skeleton(truth)
    tp = len(p & t)
    if tp == 0:
        return 0.0
    precision, recall = tp / len(p), tp / len(t)
    return 2 * precision * recall / (precision + recall)


def half_edges(g: CausalGraph) -> int:
    return sum(2 if s is EdgeState.SYMMETRIC else 1 for s in g.states if s is not EdgeState.ABSENT)


def sparsity(node_count: int, pred: CausalGraph) -> float:
    """1 - half_edges / (2 * C(N, 2)); a symmetric edge counts as two half-edges."""
    if node_count < 2:
        raise InputError("sparsity needs at least two variables")
    return 1.0 - half_edges(pred) / (2 * math.comb(node_count, 2))


def decisiveness(pred: CausalGraph) -> float:
    asym = sym = 0
    for s in pred.states:
        if s in (EdgeState.FORWARD, EdgeState.BACKWARD):
            asym += 1
        elif s is EdgeState.SYMMETRIC:
            sym += 1
    count = asym + sym
    if count == 0:
        return 0.0
    return asym / count


def delta_d(a: CausalGraph, b: CausalGraph) -> float:
    """Change in decisiveness when switching from ``a`` to ``b``."""
    return decisiveness(b) - decisiveness(a)


def ads_from_values(values: Mapping[int, float], symmetric=SYMMETRIC_IDS,
                    asymmetric=ASYMMETRIC_IDS) -> float:
    sym = [values[t] for t in symmetric if t in values]
    asym = [values[t] for t in asymmetric if t in values]
    if not sym or not asym:
        raise InputError("ADS needs at least one symmetric and one asymmetric template")
    return statistics.fmean(asym) - statistics.fmean(sym)


def ads(per_template_graphs: Mapping[int, CausalGraph]) -> float:
    """Mean decisiveness of asymmetric templates minus that of symmetric ones."""
    return ads_from_values({t: decisiveness(g) for t, g in per_template_graphs.items()})


@dataclass(frozen=True)
class PairChange:
    a: str
    b: str
    before: EdgeState
    after: EdgeState


def graph_difference(a: CausalGraph, b: CausalGraph) -> list[PairChange]:
    """Pairs whose state differs, in ``a``'s node order."""
    b = _aligned(b, a)
    return [PairChange(x, y, s, t) for (x, y, s), t in zip(a.pairs(), b.states) if s is not t]


# reports -------------------------------------------------------------------

@dataclass(frozen=True)
class MetricReport:
    metric: str
    dataset: str
    model: str
    values: dict = field(default_factory=dict)
    mean: float | None = None
    std: float | None = None
    note: str = ""

    def cell(self, digits: int = 2) -> str:
        if self.mean is None:
            return "-"
        if self.std is None:
            return f"{self.mean:.{digits}f}"
        return f"{self.mean:.{digits}f}±{self.std:.{digits}f}"


def summarize(metric: str, dataset: str, model: str, values: Mapping[int, float]) -> MetricReport:
    """Mean and population standard deviation over the templates present."""
    vals = [float(values[k]) for k in sorted(values)]
    if not vals:
        return MetricReport(metric, dataset, model, {}, None, None)
    return MetricReport(metric, dataset, model, {int(k): float(values[k]) for k in sorted(values)},
                        statistics.fmean(vals), statistics.pstdev(vals))


METRIC_ORDER = ("SID", "SHD", "F1", "Sparsity", "Decisiveness", "ADS")


def evaluate_templates(graphs: Mapping[int, CausalGraph], truth: CausalGraph, dataset: str,
                       model: str) -> list[MetricReport]:
    """All metric rows for one dataset/model from per-template graphs."""
    per = {name: {} for name in METRIC_ORDER[:-1]}
    for t, g in sorted(graphs.items()):
        per["SID"][t] = sid(g, truth).mean
        per["SHD"][t] = shd(g, truth)
        per["F1"][t] = f1(g, truth)
        per["Sparsity"][t] = sparsity(len(truth.nodes), g)
        per["Decisiveness"][t] = decisiveness(g)
    rows = [summarize(name, dataset, model, per[name]) for name in METRIC_ORDER[:-1]]
    try:
        value = ads(graphs)
    except InputError:
        rows.append(MetricReport("ADS", dataset, model, note="needs both template groups"))
    else:
        rows.append(MetricReport("ADS", dataset, model, {}, value, None))
    return rows


def excluded_reports(dataset: str, model: str, reason: str) -> list[MetricReport]:
    return [MetricReport(name, dataset, model, note=reason) for name in METRIC_ORDER]
