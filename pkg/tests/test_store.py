"""Store backends: serialization, search semantics, and equivalence."""

import dataclasses
import json
import logging
import re

import pytest

from support import make_fit, make_plot, make_table, stamp, varied_record
from trackkit.evaluator import Scalar
from trackkit.features import ReportFeatures, content_id, extract_features, flatten_text
from trackkit.parser import parse
from trackkit.store import (
    CorruptStore,
    INDEX_MAGIC,
    IndexedStore,
    JsonFileStore,
    MemoryStore,
    Record,
    build_record,
    field_matches,
    find_records,
    open_store,
    record_from_dict,
    record_to_dict,
    rm_record,
)


def all_backends(tmp_path):
    return [
        MemoryStore(),
        JsonFileStore(tmp_path / "a.json"),
        IndexedStore(tmp_path / "b.json"),
    ]


# --- serialization ---


def test_record_round_trips_through_json(tmp_path):
    for i in range(8):
        record = varied_record(i)
        body = json.loads(json.dumps(record_to_dict(record)))
        assert record_from_dict(body) == record


def test_report_record_round_trips():
    fs = extract_features(Scalar(0), timestamp=stamp(1), user="u")
    report = ReportFeatures(
        title="Weekly gems",
        text="prose here",
        result_ids=("SpkyV2_" + "a" * 32,),
        n_results=1,
        n_plots=0,
        results_interdependent=False,
    )
    fs = dataclasses.replace(fs, klass="report", specific=report)
    record = Record(content_id(fs), fs, "report", result_ids=report.result_ids)
    assert record_from_dict(json.loads(json.dumps(record_to_dict(record)))) == record


def test_loaded_content_ids_still_verify(tmp_path):
    store = JsonFileStore(tmp_path / "db.json")
    record = varied_record(3)
    store.insert(record)
    loaded = JsonFileStore(tmp_path / "db.json").get(record.uniqueid)
    assert loaded is not None
    assert content_id(loaded.featureset) == loaded.uniqueid


# --- basic operations on every backend ---


def test_insert_get_remove(tmp_path):
    for store in all_backends(tmp_path):
        record = varied_record(0)
        store.insert(record)
        assert store.get(record.uniqueid) == record
        assert store.remove(record.uniqueid) is True
        assert store.get(record.uniqueid) is None
        assert store.remove(record.uniqueid) is False


def test_duplicate_insert_replaces_and_logs(tmp_path, caplog):
    for store in all_backends(tmp_path):
        record = varied_record(1)
        first = dataclasses.replace(record, preview="first")
        second = dataclasses.replace(record, preview="second")
        store.insert(first)
        with caplog.at_level(logging.INFO, logger="trackkit.store"):
            store.insert(second)
        assert any("replacing" in m for m in caplog.messages)
        assert store.get(record.uniqueid).preview == "second"
        assert store.find("", ret_type="count") == 1
        caplog.clear()


def test_file_store_persists_across_instances(tmp_path):
    path = tmp_path / "db.json"
    record = varied_record(2)
    JsonFileStore(path).insert(record)
    assert JsonFileStore(path).get(record.uniqueid) == record


# --- search semantics ---


def seeded_store(tmp_path, n=12):
    store = JsonFileStore(tmp_path / "db.json")
    records = [varied_record(i) for i in range(n)]
    for r in records:
        store.insert(r)
    return store, records


def test_find_is_case_insensitive_and_unanchored(tmp_path):
    store, _ = seeded_store(tmp_path)
    assert store.find("ALICE", ret_type="count") >= 1
    assert store.find("lice", ret_type="count") == store.find("alice", ret_type="count")


def test_find_supports_regex(tmp_path):
    store, _ = seeded_store(tmp_path)
    both = store.find("alice|bob", ret_type="count")
    assert both == store.find("alice", ret_type="count") + store.find("bob", ret_type="count")
    assert store.find("^plot$", field="klass", ret_type="count") == store.find(
        "plot", field="klass", ret_type="count"
    )


def test_find_field_filter(tmp_path):
    store, records = seeded_store(tmp_path)
    only_users = store.find("alice", field="user", ret_type="record")
    assert only_users
    assert all(r.featureset.user == "alice" for r in only_users)
    # "gems" appears in project for half the records; restricting to tags
    # must not see those
    tagged = store.find("gems", field="tags", ret_type="record")
    assert all(any("gems" in t for t in r.featureset.tags) for r in tagged)


def test_field_selector_matches_last_segment():
    assert field_matches("user", "user")
    assert field_matches("specific.formula", "formula")
    assert field_matches("specific.vars[0].column", "column")
    assert field_matches("specific.vars[0]", "vars")
    assert not field_matches("specific.formula", "form")
    assert not field_matches("user", "specific.user")


def test_ret_types(tmp_path):
    store, _ = seeded_store(tmp_path, n=6)
    records = store.find("", ret_type="record")
    ids = store.find("", ret_type="id")
    count = store.find("", ret_type="count")
    assert [r.uniqueid for r in records] == ids
    assert len(records) == count == 6
    with pytest.raises(ValueError):
        store.find("", ret_type="records")


def test_order_newest_first_then_id(tmp_path):
    store = MemoryStore()
    a = varied_record(0, timestamp=stamp(5))
    b = varied_record(1, timestamp=stamp(5))
    c = varied_record(2, timestamp=stamp(9))
    for r in (a, b, c):
        store.insert(r)
    got = store.find("", ret_type="id")
    tied = sorted([a.uniqueid, b.uniqueid])
    assert got == [c.uniqueid] + tied


def test_bad_regex_raises(tmp_path):
    store, _ = seeded_store(tmp_path, n=2)
    with pytest.raises(re.error):
        store.find("([")


# --- removal by value ---


def test_rm_record_by_value_and_by_id(tmp_path):
    store = MemoryStore()
    program = parse('set_seed(4)\nd <- read_csv("gems.csv")')
    plot = make_plot(seed=3)
    record = build_record(plot, program=program, at=1, tags=("x",), user="u", timestamp=stamp(0))
    store.insert(record)
    # same value and context, different session details: same id
    assert rm_record(store, plot, program=program, at=1, tags=("x",), user="w", timestamp=stamp(9))
    assert store.find("", ret_type="count") == 0
    store.insert(record)
    assert rm_record(store, record.uniqueid)
    assert store.find("", ret_type="count") == 0


def test_build_record_attaches_code(tmp_path):
    program = parse('set_seed(4)\nd <- read_csv("gems.csv")\nnrow(d)')
    record = build_record(Scalar(3), program=program, at=2, timestamp=stamp(0), user="u")
    assert record.featureset.code is not None
    assert "read_csv" in record.featureset.code.functions
    assert record.featureset.code.n_statements == 2  # seed does not feed nrow


# --- file integrity ---


def test_corrupt_json_reports_offset(tmp_path):
    path = tmp_path / "db.json"
    path.write_text('{"schema_version": 1, "records": [}')
    with pytest.raises(CorruptStore) as info:
        JsonFileStore(path).all_records()
    assert info.value.offset == 34
    assert "byte 34" in str(info.value)


def test_wrong_schema_version(tmp_path):
    path = tmp_path / "db.json"
    path.write_text('{"schema_version": 99, "records": []}')
    with pytest.raises(CorruptStore):
        JsonFileStore(path).all_records()


def test_empty_or_missing_file_is_an_empty_store(tmp_path):
    path = tmp_path / "db.json"
    assert JsonFileStore(path).all_records() == []
    path.write_text("")
    assert JsonFileStore(path).all_records() == []


def test_atomic_rewrite_never_leaves_partial_files(tmp_path):
    path = tmp_path / "db.json"
    store = JsonFileStore(path)
    for i in range(5):
        store.insert(varied_record(i))
        json.loads(path.read_text())  # parse must succeed after every write
    leftovers = [p for p in tmp_path.iterdir() if p.name.startswith(".records-")]
    assert leftovers == []


# --- opening ---


def test_open_store_dispatch(tmp_path, monkeypatch):
    assert isinstance(open_store("memory:"), MemoryStore)
    assert isinstance(open_store(tmp_path / "x.json"), JsonFileStore)
    indexed = open_store(f"indexed:{tmp_path / 'y.json'}")
    assert isinstance(indexed, IndexedStore)
    monkeypatch.setenv("TRACKR_DB", str(tmp_path / "env.json"))
    store = open_store(None)
    assert isinstance(store, JsonFileStore)
    assert store.path == tmp_path / "env.json"


# --- the indexed backend ---


def test_index_file_has_magic_and_answers_match(tmp_path):
    store = IndexedStore(tmp_path / "db.json")
    for i in range(10):
        store.insert(varied_record(i))
    plain = JsonFileStore(tmp_path / "db.json")
    assert store.find("alice", ret_type="id") == plain.find("alice", ret_type="id")
    assert store.index_path.read_bytes().startswith(INDEX_MAGIC)


def test_corrupt_index_is_rebuilt_silently(tmp_path):
    store = IndexedStore(tmp_path / "db.json")
    store.insert(varied_record(0, user="alice"))
    assert store.find("alice", ret_type="count") == 1
    store.index_path.write_bytes(b"garbage not an index")
    assert store.find("alice", ret_type="count") == 1
    assert store.index_path.read_bytes().startswith(INDEX_MAGIC)


def test_index_notices_external_writes(tmp_path):
    indexed = IndexedStore(tmp_path / "db.json")
    indexed.insert(varied_record(0, user="alice", timestamp=stamp(0)))
    assert indexed.find("alice", ret_type="count") == 1
    # another handle writes behind the index's back
    JsonFileStore(tmp_path / "db.json").insert(varied_record(4, user="alice", timestamp=stamp(4)))
    assert indexed.find("alice", ret_type="count") == 2


def test_indexed_equals_scan_on_many_patterns(tmp_path):
    indexed = IndexedStore(tmp_path / "db.json")
    records = [varied_record(i) for i in range(25)]
    for r in records:
        indexed.insert(r)
    reference = MemoryStore()
    for r in records:
        reference.insert(r)
    patterns = [
        "alice", "ALICE", "gems", "batch1", "smooth", "carat", "price",
        "3", "42", "zzz", "point", "a", "e", "si1",
        "alice|bob", "^model$", "gems[0-9]", "b.tch", r"\bsmooth\b", "",
    ]
    fields = [None, "user", "tags", "klass", "geoms", "formula"]
    for pattern in patterns:
        for field in fields:
            assert indexed.find(pattern, field=field, ret_type="id") == reference.find(
                pattern, field=field, ret_type="id"
            ), (pattern, field)
