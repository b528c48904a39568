"""Durable, content-addressed persistence for indexes and pipeline records.

On-disk layout under one directory:

    blobs/<sha1-hex>   raw file bytes, named by their own digest
    catalog.jsonl      one canonical JSON record per line (sorted keys, LF)
    manifests/         per-invocation run manifests (CLI)

The catalog is written in a fixed record order with volatile fields (wall
clock, durations) excluded, so identical pipeline runs produce byte-identical
catalogs and comparable digests.  An SQLite mirror of the catalog can be
exported for ad-hoc queries; the directory remains the source of truth.
"""

from __future__ import annotations

import hashlib
import json
import os
import sqlite3

from . import imports as imp
from .scanner import BlockCandidate, CorpusIndex, ParseFailure, ScanConfig
from .syntax import SourceUnit

RECORD_KINDS = ("unit", "candidate", "import_edge", "closure", "module", "report", "dedup")


class StoreError(Exception):
    pass


def canonical_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"


def put_blob(root: str, data: bytes) -> str:
    """Store bytes at blobs/<sha1>; returns the key. Idempotent."""
    sha1 = hashlib.sha1(data).hexdigest()
    blob_dir = os.path.join(root, "blobs")
    path = os.path.join(blob_dir, sha1)
    if not os.path.exists(path):
        try:
            os.makedirs(blob_dir, exist_ok=True)
            tmp = path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except OSError as exc:
            raise StoreError(f"cannot store blob {sha1}: {exc}") from exc
    return sha1


def get_blob(root: str, sha1: str) -> bytes:
    path = os.path.join(root, "blobs", sha1)
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise StoreError(f"missing blob {sha1}: {exc}") from exc


class IndexStore:
    def __init__(self, root: str):
        self.root = root
        self.catalog_path = os.path.join(root, "catalog.jsonl")
        os.makedirs(root, exist_ok=True)

    # -- writing -----------------------------------------------------------

    def write_index(self, index: CorpusIndex) -> str:
        """Serialize a freshly scanned index; returns the catalog digest."""
        failures = {f.path: f for f in index.parse_failures}
        lines: list[str] = []
        for path in sorted(index.units):
            unit = index.units[path]
            put_blob(self.root, unit.data)
            failure = failures.get(path)
            lines.append(
                canonical_line(
                    {
                        "kind": "unit",
                        "path": unit.path,
                        "sha1": unit.sha1,
                        "encoding": unit.encoding,
                        "parse_ok": failure is None,
                        "error_class": failure.error_class if failure else None,
                        "error": failure.message if failure else None,
                    }
                )
            )
        for cand in sorted(index.candidates, key=lambda c: (c.unit_path, c.span[0], c.qualname)):
            lines.append(
                canonical_line(
                    {
                        "kind": "candidate",
                        "qualname": cand.qualname,
                        "path": cand.unit_path,
                        "span": list(cand.span),
                        "candidate_kind": cand.kind,
                        "name": cand.name,
                        "bases": list(cand.bases),
                        "has_forward": cand.has_forward,
                        "is_abstract": cand.is_abstract,
                        "eligible": cand.eligible,
                        "category": cand.category,
                        "stmt_index": cand.stmt_index,
                    }
                )
            )
        for src, module, target in sorted(index.import_edges):
            lines.append(
                canonical_line({"kind": "import_edge", "src": src, "module": module, "target": target})
            )
        try:
            tmp = self.catalog_path + ".tmp"
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.writelines(lines)
            os.replace(tmp, self.catalog_path)
        except OSError as exc:
            raise StoreError(f"cannot write catalog: {exc}") from exc
        return self.catalog_digest()

    def append_record(self, kind: str, payload: dict) -> int:
        if kind not in RECORD_KINDS:
            raise StoreError(f"unknown record kind: {kind}")
        line = canonical_line({"kind": kind, **payload})
        try:
            with open(self.catalog_path, "a", encoding="utf-8", newline="") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StoreError(f"cannot append record: {exc}") from exc
        return sum(1 for _ in self.records())

    # -- reading -----------------------------------------------------------

    def records(self, kind: str | None = None) -> list[dict]:
        if not os.path.exists(self.catalog_path):
            return []
        out = []
        with open(self.catalog_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if kind is None or record.get("kind") == kind:
                    out.append(record)
        return out

    def query(self, kind: str | None = None, **filters) -> list[dict]:
        return [
            r for r in self.records(kind) if all(r.get(k) == v for k, v in filters.items())
        ]

    def catalog_digest(self) -> str:
        try:
            with open(self.catalog_path, "rb") as fh:
                return hashlib.sha1(fh.read()).hexdigest()
        except OSError:
            return hashlib.sha1(b"").hexdigest()

    def load_index(self, config: ScanConfig | None = None) -> CorpusIndex:
        index = CorpusIndex(config=config or ScanConfig())
        for record in self.records():
            kind = record["kind"]
            if kind == "unit":
                data = get_blob(self.root, record["sha1"])
                unit = SourceUnit(
                    path=record["path"], data=data, sha1=record["sha1"], encoding=record["encoding"]
                )
                index.units[unit.path] = unit
                if record["parse_ok"]:
                    index.module_map[imp.unit_module_path(unit.path)] = unit.path
                else:
                    index.parse_failures.append(
                        ParseFailure(unit.path, record["error_class"], record["error"] or "")
                    )
            elif kind == "candidate":
                index.candidates.append(
                    BlockCandidate(
                        qualname=record["qualname"],
                        unit_path=record["path"],
                        span=tuple(record["span"]),
                        kind=record["candidate_kind"],
                        name=record["name"],
                        bases=tuple(record["bases"]),
                        has_forward=record["has_forward"],
                        is_abstract=record["is_abstract"],
                        eligible=record["eligible"],
                        category=record["category"],
                        stmt_index=record["stmt_index"],
                    )
                )
            elif kind == "import_edge":
                index.import_edges.append((record["src"], record["module"], record["target"]))
        return index

    # -- optional relational mirror -----------------------------------------

    def export_sqlite(self, path: str) -> None:
        """Mirror the catalog into SQLite, one table per record kind."""
        conn = sqlite3.connect(path)
        try:
            with conn:
                for kind in RECORD_KINDS:
                    conn.execute(
                        f"CREATE TABLE IF NOT EXISTS {kind} (id INTEGER PRIMARY KEY, payload TEXT NOT NULL)"
                    )
                    conn.execute(f"DELETE FROM {kind}")
                for record in self.records():
                    kind = record["kind"]
                    payload = {k: v for k, v in record.items() if k != "kind"}
                    conn.execute(
                        f"INSERT INTO {kind} (payload) VALUES (?)",
                        (json.dumps(payload, sort_keys=True),),
                    )
        finally:
            conn.close()
