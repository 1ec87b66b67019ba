"""Metric records, aligned text tables and run-directory aggregation."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Sequence

from .errors import InputError
from .graphs import CausalGraph
from .metrics import METRIC_ORDER, MetricReport

METRICS_FILE = "metrics.json"


def truth_digest(truth: CausalGraph) -> str:
    blob = json.dumps(truth.to_record(), sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def report_to_record(r: MetricReport) -> dict:
    return {"metric": r.metric, "values": {str(k): v for k, v in r.values.items()},
            "mean": r.mean, "std": r.std, "note": r.note}


def record_to_report(rec: dict, dataset: str, model: str) -> MetricReport:
    return MetricReport(rec["metric"], dataset, model, {int(k): v for k, v in rec["values"].items()},
                        rec["mean"], rec["std"], rec.get("note", ""))


def metrics_document(reports: Sequence[MetricReport], *, dataset: str, truth: CausalGraph,
                     model: str, method: str, manifest_digest: str, excluded: bool = False,
                     extra: dict | None = None) -> dict:
    doc = {"dataset": dataset, "truth_digest": truth_digest(truth), "model": model,
           "method": method, "manifest_digest": manifest_digest, "excluded": excluded,
           "rows": [report_to_record(r) for r in reports]}
    if extra:
        doc.update(extra)
    return doc


def format_table(header_rows: Sequence[Sequence[str]], body: Sequence[Sequence[str]]) -> str:
    """Left-aligned first column, right-aligned cells, two-space gutters."""
    allrows = list(header_rows) + list(body)
    widths = [max(len(r[c]) for r in allrows) for c in range(len(allrows[0]))]
    lines = []
    for k, row in enumerate(allrows):
        cells = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if k == len(header_rows) - 1:
            lines.append("-" * len(lines[-1]))
    return "\n".join(lines) + "\n"


def metric_table(docs: Sequence[dict], digits: int = 2) -> str:
    """Metrics down the side; one column per (dataset, model, method)."""
    header = [["", *[d["dataset"] for d in docs]],
              ["", *[d["model"] for d in docs]],
              ["", *[d["method"] for d in docs]]]
    body = []
    for name in METRIC_ORDER:
        row = [name]
        for d in docs:
            rec = next((r for r in d["rows"] if r["metric"] == name), None)
            if d.get("excluded"):
                row.append("excluded")
            elif rec is None:
                row.append("-")
            else:
                row.append(record_to_report(rec, d["dataset"], d["model"]).cell(digits))
        body.append(row)
    return format_table(header, body)


def collect_metric_documents(run_dirs: Sequence) -> list[dict]:
    docs = []
    for run in run_dirs:
        run = Path(run)
        if not run.is_dir():
            raise InputError(f"{run} is not a directory")
        found = sorted(run.rglob(METRICS_FILE))
        if not found:
            raise InputError(f"{run} contains no {METRICS_FILE}")
        docs += [json.loads(p.read_text(encoding="utf-8")) for p in found]
    check_compatible(docs)
    return docs


def check_compatible(docs: Sequence[dict]) -> None:
    """Reject runs that disagree on a dataset's ground truth or repeat a column."""
    truth, seen = {}, set()
    for d in docs:
        prev = truth.setdefault(d["dataset"], d["truth_digest"])
        if prev != d["truth_digest"]:
            raise InputError(f"runs disagree on the ground truth of dataset {d['dataset']!r}")
        key = (d["dataset"], d["model"], d["method"])
        if key in seen:
            raise InputError(f"two runs report dataset={key[0]!r} model={key[1]!r} "
                             f"method={key[2]!r}")
        seen.add(key)


def merged_report(run_dirs: Sequence) -> tuple[str, list[dict]]:
    docs = collect_metric_documents(run_dirs)
    docs.sort(key=lambda d: (d["dataset"], d["method"], d["model"]))
    return metric_table(docs), docs


# causal chains -----------------------------------------------------------------

def chain_table(model: str, results: Sequence[dict]) -> tuple[str, dict]:
    """Correct counts per chain length, sub-chains, randomized and overall accuracy."""
    cols: dict[str, list[bool]] = {}
    for r in results:
        key = f"N={r['length']}" if r["variant"] == "standard" else r["variant"]
        cols.setdefault(key, []).append(r["correct"])
    order = [f"N={n}" for n in range(2, 11)] + ["subchain", "randomized"]
    labels = {"subchain": "Subchains", "randomized": "Randomized"}
    header, row, record = [""], [model], {}
    for key in order:
        if key not in cols:
            continue
        vals = cols[key]
        label = labels.get(key, key)
        if key in labels:
            label += f" ({len(vals)})"
        header.append(label)
        row.append(f"{sum(vals)}/{len(vals)}")
        record[label] = {"correct": sum(vals), "total": len(vals)}
    total = sum(r["correct"] for r in results)
    acc = total / len(results) if results else 0.0
    header.append("Accuracy")
    row.append(f"{100 * acc:.2f}%")
    record["Accuracy"] = acc
    return format_table([header], [row]), record
