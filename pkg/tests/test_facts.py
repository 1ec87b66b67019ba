import logging
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

import causalprobe
from causalprobe.datasets import get_dataset
from causalprobe.errors import ConfigurationError, InputError
from causalprobe.facts import (CausalFact, EmbeddingRecord, Polarity, VectorStore, build_store,
                               generate_statements, ingest_report, knn_graph, knn_predict_edge,
                               nearest, normalize_text)
from causalprobe.gateway import Gateway, ResponseCache, load_provider, mock_provider

from oracles import nearest_scan

KB = Path(causalprobe.__file__).parent / "data" / "kb"


def ngram_gateway(**kw):
    return Gateway(mock_provider(embed_mode="ngram", embed_dim=128, **kw), ResponseCache())


def test_ten_row_fixture():
    report = ingest_report(KB / "conceptnet_10.tsv")
    assert report.rows == 10
    assert [(f.cause, f.effect) for f in report.facts] == [
        ("driving", "lack of fuel"), ("rain", "flood"), ("smoking", "cancer")]
    assert report.facts[-1].weight == 2.0


def test_no_matching_relation_warns(caplog):
    with caplog.at_level(logging.WARNING):
        report = ingest_report(KB / "conceptnet_10.tsv", relation="/r/Antonym/")
    assert report.facts == [] and "no /r/Antonym/ relations" in caplog.text


def test_duplicates_and_malformed_rows(tmp_path):
    path = tmp_path / "kb.tsv"
    row = "/a/x\t/r/Causes\t/c/en/heat\t/c/en/fire\t{}\n"
    path.write_text(row + row + "broken\n/a/y\t/r/Causes\tnot-a-uri\t/c/en/x\t{}\n",
                    encoding="utf-8")
    report = ingest_report(path)
    assert len(report.facts) == 1 and report.duplicates == 1 and report.malformed == 2


def test_normalize_text():
    assert normalize_text("Lack_of__Fuel") == "lack of fuel"


def test_custom_normalization():
    report = ingest_report(KB / "conceptnet_10.tsv", normalize=str.upper)
    assert ("DRIVING", "LACK_OF_FUEL") in [(f.cause, f.effect) for f in report.facts]


def test_fact_validation():
    with pytest.raises(InputError):
        CausalFact("rain", "rain")


@given(st.integers(0, 6), st.lists(st.sampled_from([1, 2, 3, 4, 5]), unique=True))
def test_statement_count(n_facts, templates):
    facts = [CausalFact(f"c{k}", f"e{k}") for k in range(n_facts)]
    assert len(generate_statements(facts, templates)) == 2 * n_facts * len(templates)


def test_swapping_twice_gives_back_the_statement():
    fact = CausalFact("rain", "flood")
    causal, anti = generate_statements([fact], [4])
    assert causal.text == "Rain causes flood." and anti.text == "Flood causes rain."
    swapped = generate_statements([CausalFact(fact.effect, fact.cause)], [4])
    assert swapped[1].text == causal.text and swapped[0].text == anti.text


def small_store(gw):
    facts = ingest_report(KB / "conceptnet_10.tsv").facts
    return build_store(generate_statements(facts, [1, 2, 3, 4, 5]), gw)


def test_store_round_trip(tmp_path):
    store = small_store(ngram_gateway())
    digest = store.save(tmp_path / "s.cpvs")
    again = VectorStore.load(tmp_path / "s.cpvs")
    assert again.digest == digest and again.records == store.records
    assert np.array_equal(again.matrix, store.matrix)
    assert again.to_bytes() == store.to_bytes()


def test_store_corruption_is_detected(tmp_path):
    data = bytearray(small_store(ngram_gateway()).to_bytes())
    data[40] ^= 0xFF
    with pytest.raises(InputError):
        VectorStore.from_bytes(bytes(data))
    with pytest.raises(InputError):
        VectorStore.from_bytes(b"CPVS")


def test_self_match_has_unit_similarity(backend):
    gw = ngram_gateway()
    store = small_store(gw)
    for rec in store.records:
        idx, sim, _ = nearest(store, gw.embed(rec.text), backend)
        assert store.records[idx].text == rec.text
        assert sim == pytest.approx(1.0, abs=1e-6)


def test_nearest_errors():
    empty = VectorStore("m", [], np.zeros((0, 4), dtype=np.float32))
    with pytest.raises(InputError):
        nearest(empty, np.ones(4))
    store = VectorStore("m", [EmbeddingRecord(0, 4, Polarity.CAUSAL, "x")],
                        np.ones((1, 4), dtype=np.float32))
    with pytest.raises(InputError):
        nearest(store, np.ones(3))


def test_ties_go_to_the_lowest_index(backend):
    recs = [EmbeddingRecord(k, 4, Polarity.CAUSAL, str(k)) for k in range(3)]
    store = VectorStore("m", recs, np.array([[0, 1], [1, 0], [1, 0]], dtype=np.float32))
    idx, sim, ties = nearest(store, np.array([1.0, 0.0]), backend)
    assert (idx, ties) == (1, 2) and sim == pytest.approx(1.0)


def test_model_mismatch_is_rejected():
    store = small_store(ngram_gateway())
    other = Gateway(mock_provider(embed_mode="ngram", embed_dim=128, model="other-1"),
                    ResponseCache())
    with pytest.raises(ConfigurationError):
        knn_predict_edge(("rain", "flood"), 4, store, other)


def test_knn_matches_linear_scan_oracle(backend):
    gw = ngram_gateway()
    store = small_store(gw)
    ds = get_dataset("driving")
    for t in (1, 2, 3, 4, 5):
        graph, preds = knn_graph(ds, t, store, gw, backend)
        for p in preds:
            idx, best = nearest_scan(store.matrix, gw.embed(p.query))
            assert p.match_index == idx and p.similarity == pytest.approx(best, abs=1e-12)
            assert p.present == (store.records[idx].polarity is Polarity.CAUSAL)


def test_literal_fact_is_found_present():
    gw = Gateway(load_provider("scripted"), ResponseCache())
    facts = ingest_report(KB / "conceptnet_50.tsv").facts
    store = build_store(generate_statements(facts, [4]), gw)
    pred = knn_predict_edge(("smoking", "cancer"), 4, store, gw)
    assert pred.present and pred.match_text == "Smoking causes cancer."
    assert not knn_predict_edge(("cancer", "smoking"), 4, store, gw).present
