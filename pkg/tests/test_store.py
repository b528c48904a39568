"""Content-addressed persistence and catalog determinism."""

from __future__ import annotations

import hashlib
import sqlite3

import pytest

from scopeweaver.scanner import scan
from scopeweaver.store import IndexStore, StoreError, get_blob, put_blob
from tests.conftest import MINI_CORPUS


def test_empty_blob_key_is_the_standard_constant(tmp_path):
    assert put_blob(str(tmp_path), b"") == "da39a3ee5e6b4b0d3255bfef95601890afd80709"


def test_put_blob_is_idempotent(tmp_path):
    first = put_blob(str(tmp_path), b"payload")
    second = put_blob(str(tmp_path), b"payload")
    assert first == second
    assert get_blob(str(tmp_path), first) == b"payload"


def test_distinct_blobs_get_distinct_keys(tmp_path):
    a = put_blob(str(tmp_path), b"alpha")
    b = put_blob(str(tmp_path), b"beta")
    assert a != b
    # independent digest computation as the oracle
    assert a == hashlib.sha1(b"alpha").hexdigest()
    assert b == hashlib.sha1(b"beta").hexdigest()


def test_append_then_query(tmp_path):
    store = IndexStore(str(tmp_path))
    store.append_record("module", {"qualname": "m.A", "sha1": "0" * 40})
    found = store.query("module", qualname="m.A")
    assert len(found) == 1 and found[0]["sha1"] == "0" * 40
    assert store.query("report") == []


def test_unknown_record_kind_is_refused(tmp_path):
    store = IndexStore(str(tmp_path))
    with pytest.raises(StoreError):
        store.append_record("mystery", {})


def test_catalog_digest_stable_across_reopen(tmp_path):
    index = scan([str(MINI_CORPUS)])
    store = IndexStore(str(tmp_path))
    digest = store.write_index(index)
    reopened = IndexStore(str(tmp_path))
    assert reopened.catalog_digest() == digest


def test_load_index_round_trip(tmp_path):
    index = scan([str(MINI_CORPUS)])
    store = IndexStore(str(tmp_path))
    store.write_index(index)
    loaded = store.load_index()
    assert set(loaded.units) == set(index.units)
    assert [c.qualname for c in loaded.candidates] == [c.qualname for c in index.candidates]
    assert loaded.module_map == index.module_map
    assert sorted(loaded.import_edges) == sorted(index.import_edges)
    for path, unit in index.units.items():
        assert loaded.units[path].data == unit.data


def test_loaded_index_supports_extraction(tmp_path, golden_tinyresnet):
    from scopeweaver.assembler import assemble
    from scopeweaver.resolver import closure, find_target

    store = IndexStore(str(tmp_path))
    store.write_index(scan([str(MINI_CORPUS)]))
    loaded = store.load_index()
    module = assemble(closure(loaded, find_target(loaded, "TinyResNet")), loaded)
    assert module.source == golden_tinyresnet


def test_sqlite_export_mirrors_catalog(tmp_path):
    store = IndexStore(str(tmp_path))
    store.write_index(scan([str(MINI_CORPUS)]))
    store.append_record("module", {"qualname": "m.A", "sha1": "0" * 40})
    db_path = str(tmp_path / "mirror.sqlite")
    store.export_sqlite(db_path)
    conn = sqlite3.connect(db_path)
    try:
        units = conn.execute("SELECT COUNT(*) FROM unit").fetchone()[0]
        modules = conn.execute("SELECT COUNT(*) FROM module").fetchone()[0]
    finally:
        conn.close()
    assert units == len(store.records("unit"))
    assert modules == 1
