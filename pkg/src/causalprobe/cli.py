"""Command-line entry point: ``causalprobe <group> <verb> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .datasets import bundled_names, get_dataset, load_dataset, serialize
from .discovery import (assemble_graph, excluded_pairs, inconsistent_pairs, is_excluded,
                        read_verdict_tables, rename_variables, run_pairwise_probe,
                        write_verdict_tables)
from .errors import CausalProbeError
from .facts import (build_store, generate_statements, ingest_report, knn_graph, knn_predict_edge,
                    VectorStore)
from .gateway import Gateway, ResponseCache, load_provider
from .graphs import CausalGraph
from .manifest import ExperimentManifest, dump_json, load_manifest
from .metrics import evaluate_templates, excluded_reports, graph_difference
from .prompts import (chain_prompt, default_chain_suite, load_cot_bank, load_question_bank,
                      with_cot)
from .reports import chain_table, merged_report, metric_table, metrics_document
from .verdicts import (QUEUE_COLUMNS, VerdictValue, classify, export_label_queue, import_labels,
                       write_tsv)

log = logging.getLogger("causalprobe")
BUNDLED_KB = Path(__file__).parent / "data" / "kb" / "conceptnet_50.tsv"


# plumbing ------------------------------------------------------------------

def _opt(args, name, default=None):
    return getattr(args, name, default)


def _manifest(args, kind: str, **fields) -> ExperimentManifest:
    path = _opt(args, "manifest")
    m = load_manifest(path) if path else ExperimentManifest(kind=kind)
    if path and kind == "rename-probe":
        fields["kind"] = kind
    m = m.with_overrides(provider=_opt(args, "provider"), seed=_opt(args, "seed"),
                         out=_opt(args, "out"), cache=_opt(args, "cache"), **fields)
    m.validate()
    return m


def _gateway(m: ExperimentManifest) -> Gateway:
    cfg = load_provider(m.provider)
    cache_path = Path(m.cache) if m.cache else Path(m.out) / "cache.jsonl"
    cache_path.parent.mkdir(parents=True, exist_ok=True)
    return Gateway(cfg, ResponseCache(cache_path))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _templates(value):
    if value is None:
        return None
    return tuple(int(t) for t in value.split(","))


def _write_manifest(m: ExperimentManifest) -> None:
    _write(Path(m.out) / "manifest.json", dump_json({"manifest": m.to_dict(), "digest": m.digest()}))


# datasets --------------------------------------------------------------------

def cmd_datasets_list(args) -> int:
    for name in bundled_names():
        ds = get_dataset(name)
        print(f"{name}\t{ds.n} variables\t{len(ds.truth.directed_edges())} edges")
    return 0


def cmd_datasets_show(args) -> int:
    ds = get_dataset(args.name)
    sys.stdout.write(ds.truth.to_dot(ds.name) if args.dot else serialize(ds))
    return 0


# pairwise probe ------------------------------------------------------------------

def write_probe_run(run_dir: Path, dataset, tables, meta_policy: str, model: str,
                    digest: str) -> dict:
    """Verdict table, per-template graphs, metric rows and a text report."""
    _write(run_dir / "dataset.json", serialize(dataset))
    write_verdict_tables(tables, run_dir / "verdicts.tsv")
    graphs = {}
    for t in sorted(tables, key=lambda t: t.template):
        g = assemble_graph(t, meta_policy)
        graphs[t.template] = g
        _write(run_dir / "graphs" / f"template-{t.template}.dot",
               g.to_dot(f"{dataset.name} template {t.template}"))
        _write(run_dir / "graphs" / f"template-{t.template}.json", dump_json(g.to_record()))
    excluded = is_excluded(tables, meta_policy)
    if excluded:
        reports = excluded_reports(dataset.name, model, "both verdicts Meta on some pair")
    else:
        reports = evaluate_templates(graphs, dataset.truth, dataset.name, model)
    extra = {"meta_policy": meta_policy,
             "meta_pairs": {str(t.template): [list(p) for p in excluded_pairs(t)] for t in tables},
             "inconsistent_pairs": {str(t.template): [list(p) for p in inconsistent_pairs(t)]
                                    for t in tables}}
    doc = metrics_document(reports, dataset=dataset.name, truth=dataset.truth, model=model,
                           method="direct", manifest_digest=digest, excluded=excluded, extra=extra)
    _write(run_dir / "metrics.json", dump_json(doc))
    _write(run_dir / "report.txt", metric_table([doc]))
    return doc


def _probe_dataset(gw, ds, m, run_dir):
    tables = run_pairwise_probe(ds, m.templates, gw, m.workers)
    doc = write_probe_run(run_dir, ds, tables, m.meta_policy, gw.cfg.model, m.digest())
    return tables, doc


def cmd_probe_run(args) -> int:
    fields = {"datasets": tuple(args.dataset) if args.dataset else None,
              "templates": _templates(args.templates), "meta_policy": args.meta_policy,
              "workers": args.workers}
    if args.rename:
        fields["rename"] = dict(pair.split("=", 1) for pair in args.rename)
    m = _manifest(args, "rename-probe" if args.rename else "pairwise-probe", **fields)
    if not m.datasets:
        raise CausalProbeError("no dataset given (use --dataset or a manifest)")
    gw = _gateway(m)
    out = Path(m.out)
    _write_manifest(m)
    docs = []
    for name in m.datasets:
        ds = get_dataset(name)
        tables, doc = _probe_dataset(gw, ds, m, out / ds.name)
        docs.append(doc)
        if m.kind == "rename-probe":
            mapping = {k: v for k, v in m.rename.items() if k in ds.variables}
            renamed = replace(rename_variables(ds, mapping), name=f"{ds.name}-renamed")
            rtables, rdoc = _probe_dataset(gw, renamed, m, out / f"{ds.name}-renamed")
            docs.append(rdoc)
            back = {v: k for k, v in mapping.items()}
            rows = []
            for t, rt in zip(sorted(tables, key=lambda t: t.template),
                             sorted(rtables, key=lambda t: t.template)):
                g = assemble_graph(t, m.meta_policy)
                rg = assemble_graph(rt, m.meta_policy).relabel(back)
                rows += [(t.template, c.a, c.b, c.before.symbol, c.after.symbol)
                         for c in graph_difference(g, rg)]
            write_tsv(out / ds.name / "rename-differences.tsv",
                      ("template", "a", "b", "original", "renamed"), rows)
    sys.stdout.write(metric_table(docs))
    return 0


# causal chains and question banks ------------------------------------------------

def cmd_chains_run(args) -> int:
    cot_bank = args.cot_bank or ("causal-chains" if args.cot_k else None)
    m = _manifest(args, "chains", cot_bank=cot_bank, cot_k=args.cot_k)
    gw = _gateway(m)
    bank = load_cot_bank(m.cot_bank) if m.cot_bank else None
    results, rows = [], []
    for spec in default_chain_suite(m.seed):
        cp = chain_prompt(spec)
        prompt = with_cot(cp.text, bank, m.cot_k)
        verdict = classify(gw.complete(prompt))
        answer = {VerdictValue.YES: True, VerdictValue.NO: False}.get(verdict.value)
        correct = answer is not None and answer == cp.gold
        results.append({"length": spec.length, "variant": spec.variant, "correct": correct})
        rows.append((spec.variant, spec.length, cp.text, verdict.raw, verdict.value.value,
                     "yes" if cp.gold else "no", "true" if correct else "false"))
    out = Path(m.out)
    _write_manifest(m)
    write_tsv(out / "chains.tsv", ("variant", "length", "prompt", "response", "verdict", "gold",
                                   "correct"), rows)
    text, record = chain_table(gw.cfg.model, results)
    record = {"model": gw.cfg.model, "cot_bank": m.cot_bank, "cot_k": m.cot_k, "seed": m.seed,
              "manifest_digest": m.digest(), "columns": record}
    _write(out / "table.txt", text)
    _write(out / "table.json", dump_json(record))
    sys.stdout.write(text)
    return 0


def cmd_bank_run(args) -> int:
    m = _manifest(args, "question-bank", bank=args.bank, cot_bank=args.cot_bank, cot_k=args.cot_k)
    gw = _gateway(m)
    cot = load_cot_bank(m.cot_bank) if m.cot_bank else None
    items = load_question_bank(m.bank)
    rows, queue, by_cat = [], [], {}
    graded = correct_total = 0
    for item in items:
        prompt = with_cot(item.prompt, cot, m.cot_k)
        verdict = classify(gw.complete(prompt))
        correct = ""
        if item.grading == "auto-yes-no" and verdict.value in (VerdictValue.YES, VerdictValue.NO):
            ok = verdict.value.value == (item.gold or "").lower()
            correct = "true" if ok else "false"
        elif item.grading == "auto-yes-no" and item.gold:
            correct = "false"
        if correct:
            graded += 1
            correct_total += correct == "true"
            cat = by_cat.setdefault(item.category or "", {"correct": 0, "total": 0})
            cat["total"] += 1
            cat["correct"] += correct == "true"
        if item.grading == "manual" or verdict.value is VerdictValue.UNCLASSIFIED:
            queue.append((item.id, m.bank, 0, "", "", prompt, verdict.raw, ""))
        rows.append((item.id, item.category or "", item.grading, prompt, verdict.raw,
                     verdict.value.value, item.gold or "", correct))
    out = Path(m.out)
    _write_manifest(m)
    write_tsv(out / "responses.tsv", ("id", "category", "grading", "prompt", "response",
                                      "verdict", "gold", "correct"), rows)
    if queue:
        write_tsv(out / "queue.tsv", QUEUE_COLUMNS, queue)
    summary = {"bank": m.bank, "bank_size": len(items), "graded": graded,
               "correct": correct_total, "accuracy": correct_total / graded if graded else None,
               "pending_manual": len(queue), "categories": by_cat, "model": gw.cfg.model,
               "manifest_digest": m.digest()}
    _write(out / "summary.json", dump_json(summary))
    sys.stdout.write(dump_json(summary))
    return 0


# manual labels -----------------------------------------------------------------

def _load_probe_run(run_dir: Path):
    ds = load_dataset(run_dir / "dataset.json")
    tables = read_verdict_tables(run_dir / "verdicts.tsv", ds.variables)
    meta = json.loads((run_dir / "metrics.json").read_text(encoding="utf-8"))
    return ds, tables, meta


def cmd_labels_export(args) -> int:
    run_dir = Path(args.run)
    _, tables, _ = _load_probe_run(run_dir)
    records = [r for t in tables for r in t.records]
    target = Path(args.queue) if args.queue else run_dir / "queue.tsv"
    n = export_label_queue(records, target)
    print(f"{n} unclassified responses written to {target}")
    return 0


def cmd_labels_import(args) -> int:
    run_dir = Path(args.run)
    ds, tables, meta = _load_probe_run(run_dir)
    records = import_labels(args.queue, [r for t in tables for r in t.records])
    tables = [t.with_records(records) for t in tables]
    model = tables[0].model if tables else meta["model"]
    doc = write_probe_run(run_dir, ds, tables, meta.get("meta_policy", "as-no"), model,
                          meta["manifest_digest"])
    sys.stdout.write(metric_table([doc]))
    return 0


# k-NN ----------------------------------------------------------------------------

def cmd_knn_build(args) -> int:
    m = _manifest(args, "knn-graphs", knowledge_base=args.kb, store=args.store,
                  templates=_templates(args.templates), relation=args.relation,
                  language=args.language)
    gw = _gateway(m)
    kb = Path(m.knowledge_base) if m.knowledge_base else BUNDLED_KB
    report = ingest_report(kb, m.relation, m.language)
    statements = generate_statements(report.facts, m.templates)
    store = build_store(statements, gw)
    path = Path(m.store) if m.store else Path(m.out) / "store.cpvs"
    path.parent.mkdir(parents=True, exist_ok=True)
    digest = store.save(path)
    info = {"store": path.name, "digest": digest, "records": len(store), "dim": store.dim,
            "model": store.model_id, "facts": len(report.facts), "rows": report.rows,
            "matched": report.matched, "malformed": report.malformed,
            "duplicates": report.duplicates, "manifest_digest": m.digest()}
    _write(path.with_suffix(".json"), dump_json(info))
    sys.stdout.write(dump_json(info))
    return 0


def _store_path(args, m) -> Path:
    if args.store:
        return Path(args.store)
    if m.store:
        return Path(m.store)
    return Path(m.out) / "store.cpvs"


def cmd_knn_predict(args) -> int:
    m = _manifest(args, "knn-graphs")
    gw = _gateway(m)
    store = VectorStore.load(_store_path(args, m))
    pred = knn_predict_edge(tuple(args.pair), args.template, store, gw)
    sys.stdout.write(dump_json(pred.audit()))
    return 0


def cmd_knn_graph(args) -> int:
    m = _manifest(args, "knn-graphs", datasets=tuple(args.dataset) if args.dataset else None,
                  templates=_templates(args.templates))
    gw = _gateway(m)
    store = VectorStore.load(_store_path(args, m))
    out = Path(m.out)
    _write_manifest(m)
    docs = []
    for name in m.datasets:
        ds = get_dataset(name)
        run_dir = out / f"{ds.name}-knn"
        graphs, rows = {}, []
        for t in m.templates:
            g, preds = knn_graph(ds, t, store, gw)
            graphs[t] = g
            _write(run_dir / "graphs" / f"template-{t}.dot", g.to_dot(f"{ds.name} k-NN template {t}"))
            _write(run_dir / "graphs" / f"template-{t}.json", dump_json(g.to_record()))
            for p in preds:
                a = p.audit()
                rows.append((t, p.cause, p.effect, p.query, "present" if p.present else "absent",
                             p.match_index, p.match_text, a["match_polarity"],
                             repr(p.similarity), "true" if a["tie"] else "false"))
        write_tsv(run_dir / "predictions.tsv",
                  ("template", "cause", "effect", "query", "prediction", "match_index",
                   "match_text", "match_polarity", "similarity", "tie"), rows)
        reports = evaluate_templates(graphs, ds.truth, ds.name, store.model_id)
        doc = metrics_document(reports, dataset=ds.name, truth=ds.truth, model=store.model_id,
                               method="k-NN", manifest_digest=m.digest(),
                               extra={"store_digest": store.digest})
        _write(run_dir / "metrics.json", dump_json(doc))
        _write(run_dir / "report.txt", metric_table([doc]))
        docs.append(doc)
    sys.stdout.write(metric_table(docs))
    return 0


# SCM demo -----------------------------------------------------------------------

def cmd_scm_demo(args) -> int:
    from .scm import (CausalQuery, answer_l2_via_meta, answer_query, graph_from_meta,
                      joint_distribution, load_fixture)

    model = load_fixture("ex2_m1")
    observed = load_fixture("ex2_m1_with_z")
    meta = load_fixture("ex2_m2")
    query = CausalQuery.interventional({"Y": 1}, {"X": 1})
    p_obs = joint_distribution(model).prob({"Y": 1})
    p_do = answer_query(model, query)
    joint = joint_distribution(observed)
    w = graph_from_meta(meta, "W", ("X", "Y", "Z"))
    p_meta = answer_l2_via_meta(w, joint, query)
    print(f"P(Y=1)             = {p_obs!r}")
    print(f"P(Y_(X<-1)=1)      = {p_do!r}")
    print(f"via meta graph {' '.join(f'{a}->{b}' for a, b in w.directed_edges())}"
          f" = {p_meta!r}")
    if _opt(args, "verbose"):
        print("joint " + " ".join(joint.variables) + " P")
        for values, p in joint.rows():
            print("      " + " ".join(str(v) for v in values) + f" {p!r}")
    ok = all(abs(v - 0.25) <= 1e-12 for v in (p_obs, p_do, p_meta))
    print("OK: all three equal 1/4" if ok else "MISMATCH: expected 1/4 everywhere")
    return 0 if ok else 1


# report --------------------------------------------------------------------------

def cmd_report(args) -> int:
    text, docs = merged_report(args.runs)
    sys.stdout.write(text)
    out = _opt(args, "out")
    if out:
        _write(Path(out) / "report.txt", text)
        _write(Path(out) / "report.json", dump_json(docs))
    return 0


# parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--cache", help="response cache file (default: <out>/cache.jsonl)")
    common.add_argument("--provider", help="bundled provider name or config path")
    common.add_argument("--manifest", help="experiment manifest (JSON)")
    common.add_argument("--seed", type=int, help="seed for randomized prompt variants")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="count")

    parser = argparse.ArgumentParser(prog="causalprobe", parents=[common],
                                     description="Probe language models for causal knowledge.")
    groups = parser.add_subparsers(dest="group", required=True)

    def verb(group, name, func, help_text):
        p = group.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    ds = groups.add_parser("datasets", help="bundled benchmark datasets").add_subparsers(
        dest="verb", required=True)
    verb(ds, "list", cmd_datasets_list, "list bundled datasets")
    p = verb(ds, "show", cmd_datasets_show, "print a dataset")
    p.add_argument("name")
    p.add_argument("--dot", action="store_true", help="emit the ground truth as DOT")

    probe = groups.add_parser("probe", help="pairwise causal discovery").add_subparsers(
        dest="verb", required=True)
    p = verb(probe, "run", cmd_probe_run, "query every ordered pair and score the graphs")
    p.add_argument("--dataset", action="append")
    p.add_argument("--templates", help="comma-separated template ids")
    p.add_argument("--meta-policy", choices=("as-no", "exclude-pair"))
    p.add_argument("--workers", type=int)
    p.add_argument("--rename", action="append", metavar="OLD=NEW",
                   help="also probe with renamed variables and diff the graphs")

    chains = groups.add_parser("chains", help="causal chain questions").add_subparsers(
        dest="verb", required=True)
    p = verb(chains, "run", cmd_chains_run, "grade the default chain suite")
    p.add_argument("--cot-bank", choices=("causal-chains", "natural-word-chains"))
    p.add_argument("--cot-k", type=int, default=0)

    bank = groups.add_parser("bank", help="question banks").add_subparsers(dest="verb",
                                                                           required=True)
    p = verb(bank, "run", cmd_bank_run, "ask every question of a bank")
    p.add_argument("bank", help="bundled bank name or path")
    p.add_argument("--cot-bank", choices=("causal-chains", "natural-word-chains"))
    p.add_argument("--cot-k", type=int, default=0)

    labels = groups.add_parser("labels", help="manual labeling round trip").add_subparsers(
        dest="verb", required=True)
    p = verb(labels, "export", cmd_labels_export, "write unclassified responses to a queue")
    p.add_argument("run", help="probe run directory of one dataset")
    p.add_argument("--queue", help="queue file (default: <run>/queue.tsv)")
    p = verb(labels, "import", cmd_labels_import, "apply a filled-in queue and rescore")
    p.add_argument("run")
    p.add_argument("queue")

    knn = groups.add_parser("knn", help="embedding nearest-neighbor prediction").add_subparsers(
        dest="verb", required=True)
    p = verb(knn, "build", cmd_knn_build, "build a vector store from a knowledge base dump")
    p.add_argument("--kb", help="assertion dump (default: bundled 50-fact sample)")
    p.add_argument("--store")
    p.add_argument("--templates")
    p.add_argument("--relation")
    p.add_argument("--language")
    p = verb(knn, "predict", cmd_knn_predict, "predict one ordered pair")
    p.add_argument("--store")
    p.add_argument("--pair", nargs=2, required=True, metavar=("CAUSE", "EFFECT"))
    p.add_argument("--template", type=int, default=4)
    p = verb(knn, "graph", cmd_knn_graph, "predict graphs for datasets")
    p.add_argument("--store")
    p.add_argument("--dataset", action="append")
    p.add_argument("--templates")

    scm = groups.add_parser("scm", help="structural causal model checks").add_subparsers(
        dest="verb", required=True)
    verb(scm, "demo", cmd_scm_demo, "verify the meta-model worked example")

    p = groups.add_parser("report", parents=[common], help="merge metric tables of runs")
    p.add_argument("runs", nargs="+")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if _opt(args, "verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CausalProbeError, ValueError, OSError, KeyError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(record) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
