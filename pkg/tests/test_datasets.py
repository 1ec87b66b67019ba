import json

import pytest

from causalprobe.datasets import (bundled_names, dataset_from_dict, expected_query_count,
                                  get_dataset, load_dataset, serialize)
from causalprobe.errors import DatasetError


def test_bundled_datasets_are_dags():
    assert bundled_names() == ["altitude", "cancer", "driving", "earthquake", "health",
                               "recovery"]
    for name in bundled_names():
        ds = get_dataset(name)
        assert ds.truth.is_dag()


@pytest.mark.parametrize("name,count", [("altitude", 10), ("health", 60), ("recovery", 30),
                                        ("driving", 30), ("cancer", 100), ("earthquake", 100)])
def test_query_counts(name, count):
    assert expected_query_count(get_dataset(name), 5) == count


def test_serialize_round_trip(tmp_path):
    for name in bundled_names():
        ds = get_dataset(name)
        path = tmp_path / f"{name}.json"
        path.write_text(serialize(ds), encoding="utf-8")
        again = load_dataset(path)
        assert again.truth == ds.truth and again.variables == ds.variables


def test_validation_errors():
    base = {"name": "t", "variables": ["a", "b"]}
    with pytest.raises(DatasetError):
        dataset_from_dict({**base, "edges": [{"from": "a", "to": "a"}]})
    with pytest.raises(DatasetError):
        dataset_from_dict({**base, "edges": [{"from": "a", "to": "b"}, {"from": "b", "to": "a"}]})
    with pytest.raises(DatasetError):
        dataset_from_dict({**base, "edges": [{"from": "a", "to": "c"}]})
    with pytest.raises(DatasetError):
        dataset_from_dict({**base, "colour": "red"})
    with pytest.raises(DatasetError):
        dataset_from_dict({"name": "t", "variables": ["a", "a"]})
    with pytest.raises(DatasetError):
        dataset_from_dict({**base, "edges": [{"from": "a", "to": "b", "kind": "symmetric"}]})


def test_parse_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"name": "x",\n  "variables": [}', encoding="utf-8")
    with pytest.raises(DatasetError) as info:
        load_dataset(path)
    assert "line 2" in str(info.value)


def test_unknown_dataset():
    with pytest.raises(DatasetError):
        get_dataset("no-such-dataset")


def test_provenance_is_kept():
    ds = get_dataset("altitude")
    assert set(ds.provenance.values()) == {"paper-stated"}
    doc = json.loads(serialize(ds))
    assert doc["edges"][0]["provenance"] == "paper-stated"
