"""Command-line contract: exit codes, JSON output, manifests."""

from __future__ import annotations

import json
import os

import pytest

from scopeweaver.cli import main
from tests.conftest import MINI_CORPUS
from tests.specgate_docs import BASE, _doc


@pytest.fixture(autouse=True)
def manifest_dir(tmp_path, monkeypatch):
    directory = tmp_path / "manifests"
    monkeypatch.setenv("SCOPEWEAVER_MANIFEST_DIR", str(directory))
    return directory


@pytest.fixture()
def index_dir(tmp_path):
    index = tmp_path / "index"
    assert main(["scan", str(MINI_CORPUS), "--index", str(index), "--json"]) == 0
    return index


def test_scan_reports_counts(index_dir, capsys):
    # the fixture already ran the command; run again for parseable stdout
    assert main(["scan", str(MINI_CORPUS), "--index", str(index_dir), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["units"] == 48
    assert payload["candidates"] == 62
    assert payload["eligible"] == 40


def test_extract_writes_module_and_provenance(index_dir, tmp_path, capsys, golden_tinyresnet):
    out = tmp_path / "out"
    code = main(["extract", "TinyResNet", "--index", str(index_dir), "--out", str(out), "--json"])
    assert code == 0
    module_path = out / "TinyResNet.py"
    sidecar = out / "TinyResNet.provenance.json"
    assert module_path.read_text() == golden_tinyresnet
    provenance = json.loads(sidecar.read_text())
    assert provenance["target"] == "cv_blocks.arch.resnet_tiny.TinyResNet"
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["definitions"] == 3


def test_extract_unknown_target_exit_2(index_dir, tmp_path, capsys):
    code = main(["extract", "NoSuchName", "--index", str(index_dir), "--out", str(tmp_path / "o")])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "TargetNotFound"


def test_extract_ambiguous_target_exit_2(index_dir, tmp_path, capsys):
    code = main(["extract", "helper", "--index", str(index_dir), "--out", str(tmp_path / "o")])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "AmbiguousTarget"


def test_validate_all_then_report(index_dir, tmp_path, capsys):
    assert main(["validate", "--all", "--index", str(index_dir), "--jobs", "1", "--json"]) == 0
    out = capsys.readouterr()
    summary = json.loads(out.out.strip().splitlines()[-1])
    assert summary["validated"] == 40
    assert summary["admitted"] == 40
    report_file = tmp_path / "stats.json"
    assert main(["report", "--index", str(index_dir), "--out", str(report_file), "--json"]) == 0
    stats = json.loads(report_file.read_text())
    assert stats["total"] == 40 and stats["admitted"] == 40 and stats["rate"] == 1.0


def test_validate_single_file(index_dir, tmp_path, capsys):
    out = tmp_path / "out"
    main(["extract", "PlainReLU", "--index", str(index_dir), "--out", str(out)])
    capsys.readouterr()
    assert main(["validate", str(out / "PlainReLU.py"), "--index", str(index_dir), "--jobs", "1", "--json"]) == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["validated"] == 1 and summary["admitted"] == 1


def test_dedupe_exit_codes(tmp_path, capsys):
    a = tmp_path / "a.py"
    b = tmp_path / "b.py"
    a.write_text("x = 1\n")
    b.write_text("x   =   1  # same tokens\n")
    store = tmp_path / "digests.jsonl"
    assert main(["dedupe", str(a), "--store", str(store), "--json"]) == 0
    assert main(["dedupe", str(b), "--store", str(store), "--json"]) == 3
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["status"] == "duplicate"


def test_spec_check_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(BASE))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(_doc(hyperparameters={"momentum": 1.5})))
    assert main(["spec-check", str(good), "--json"]) == 0
    assert main(["spec-check", str(bad), "--json"]) == 4
    lines = capsys.readouterr().out.strip().splitlines()
    assert json.loads(lines[0])["status"] == "pass"
    assert json.loads(lines[-1])["status"] == "reject"


def test_spec_check_retry_accounting(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("not structured at all [")
    ledger = tmp_path / "retries.jsonl"
    main(["spec-check", str(bad), "--lineage", "L1", "--retry-store", str(ledger), "--json"])
    first = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    main(["spec-check", str(bad), "--lineage", "L1", "--retry-store", str(ledger), "--json"])
    second = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert first["retry_allowed"] is True
    assert second["retry_allowed"] is False


def test_manifest_written_for_every_invocation(manifest_dir, tmp_path):
    store = tmp_path / "digests.jsonl"
    sample = tmp_path / "s.py"
    sample.write_text("x = 1\n")
    main(["dedupe", str(sample), "--store", str(store)])
    manifests = list(manifest_dir.glob("dedupe-*.json"))
    assert manifests
    payload = json.loads(manifests[0].read_text())
    assert payload["command"] == "dedupe"
    assert payload["exit_status"] == 0
    assert "started_at" in payload and "finished_at" in payload
