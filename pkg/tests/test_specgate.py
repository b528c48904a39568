"""Structural gate behavior: fixes, rejections, canonical form, retries."""

from __future__ import annotations

import json

import pytest

from scopeweaver.specgate import RetryLedger, retry_gate, validate_spec
from tests.specgate_docs import BASE, _doc, _yaml, suite


def test_fully_valid_document_passes_unchanged():
    outcome = validate_spec(json.dumps(BASE))
    assert outcome.status == "pass"
    assert outcome.fixes == [] and outcome.diagnostics == []
    assert json.loads(outcome.canonical) == BASE


def test_yaml_input_is_accepted():
    outcome = validate_spec(_yaml(BASE))
    assert outcome.status == "pass"


def test_string_learning_rate_is_coerced_with_a_fix_record():
    outcome = validate_spec(json.dumps(_doc(hyperparameters={"learning_rate": "0.01"})))
    assert outcome.status == "autofixed"
    fix = next(f for f in outcome.fixes if f["rule"] == "StringToNumber")
    assert fix["path"] == "hyperparameters.learning_rate"
    assert json.loads(outcome.canonical)["hyperparameters"]["learning_rate"] == 0.01


def test_momentum_out_of_range_is_rejected():
    outcome = validate_spec(json.dumps(_doc(hyperparameters={"momentum": 1.5})))
    assert outcome.status == "reject"
    diag = outcome.diagnostics[0]
    assert diag["path"] == "hyperparameters.momentum"
    assert diag["rule"] == "Range"
    assert diag["found"] == 1.5
    assert diag["expected"] == "[0, 1)"


def test_alias_keys_are_normalized():
    doc = _doc()
    doc["hyperparameters"]["lr"] = doc["hyperparameters"].pop("learning_rate")
    outcome = validate_spec(json.dumps(doc))
    assert outcome.status == "autofixed"
    assert any(f["rule"] == "KeyAlias" for f in outcome.fixes)
    assert "learning_rate" in json.loads(outcome.canonical)["hyperparameters"]


def test_key_order_is_repaired():
    doc = _doc()
    doc["hyperparameters"] = dict(reversed(list(doc["hyperparameters"].items())))
    outcome = validate_spec(json.dumps(doc))
    assert outcome.status == "autofixed"
    assert any(f["rule"] == "KeyOrder" for f in outcome.fixes)
    ordered = list(json.loads(outcome.canonical)["hyperparameters"])
    assert ordered[:4] == ["learning_rate", "momentum", "weight_decay", "batch_size"]


def test_extras_sort_after_required_keys():
    doc = _doc(hyperparameters={"warmup": 1, "alpha": 0.5})
    outcome = validate_spec(json.dumps(doc))
    ordered = list(json.loads(outcome.canonical)["hyperparameters"])
    assert ordered == ["learning_rate", "momentum", "weight_decay", "batch_size", "alpha", "warmup"]


def test_unknown_optimizer_is_major():
    outcome = validate_spec(json.dumps(_doc(optimizer="sophia")))
    assert outcome.status == "reject"
    assert outcome.diagnostics[0]["rule"] == "UnknownOptimizer"


def test_unparseable_document_is_not_structured():
    outcome = validate_spec(": not yaml : [unbalanced\n\t?")
    assert outcome.status == "reject"
    assert outcome.diagnostics[0]["rule"] == "NotStructured"


def test_missing_required_key_is_major():
    doc = _doc()
    del doc["metric"]
    outcome = validate_spec(json.dumps(doc))
    assert outcome.status == "reject"
    assert any(d["rule"] == "MissingKey" and d["path"] == "metric" for d in outcome.diagnostics)


def test_canonical_output_is_idempotent():
    for label, text, _fmt, expected in suite():
        if expected == "reject":
            continue
        outcome = validate_spec(text)
        again = validate_spec(outcome.canonical)
        assert again.status == "pass", label
        assert again.fixes == [], label
        assert again.canonical == outcome.canonical, label


def test_fix_soundness_every_autofix_satisfies_its_rule():
    for label, text, _fmt, expected in suite():
        if expected != "autofixed":
            continue
        outcome = validate_spec(text)
        assert outcome.status == "autofixed", label
        assert outcome.diagnostics == [], label


def test_sixty_document_suite_counts():
    counts = {"pass": 0, "autofixed": 0, "reject": 0}
    for label, text, _fmt, expected in suite():
        outcome = validate_spec(text)
        assert outcome.status == expected, (label, outcome.diagnostics, outcome.fixes)
        counts[outcome.status] += 1
    assert counts == {"pass": 20, "autofixed": 20, "reject": 20}


def test_retry_gate_allows_exactly_once_per_lineage():
    ledger = RetryLedger()
    rejected = validate_spec("not a mapping")
    assert retry_gate(rejected, "lineage-1", ledger) == "allow"
    assert retry_gate(rejected, "lineage-1", ledger) == "deny"
    assert retry_gate(rejected, "lineage-1", ledger) == "deny"
    assert retry_gate(rejected, "lineage-2", ledger) == "allow"


def test_retry_gate_requires_a_rejection():
    ledger = RetryLedger()
    passed = validate_spec(json.dumps(BASE))
    with pytest.raises(ValueError):
        retry_gate(passed, "lineage-3", ledger)


def test_retry_budget_never_exceeds_one(tmp_path):
    ledger = RetryLedger(str(tmp_path / "retries.jsonl"))
    rejected = validate_spec("[]")
    lineages = [f"L{i}" for i in range(8)]
    allows = {name: 0 for name in lineages}
    for _round in range(4):
        for name in lineages:
            if retry_gate(rejected, name, ledger) == "allow":
                allows[name] += 1
    assert all(count == 1 for count in allows.values())
    # persisted ledger keeps denying after reopen
    reopened = RetryLedger(str(tmp_path / "retries.jsonl"))
    assert retry_gate(rejected, "L0", reopened) == "deny"


def test_validate_spec_consults_ledger_for_retry_allowed(tmp_path):
    ledger = RetryLedger()
    first = validate_spec("[]", lineage="doc-9", retry_ledger=ledger)
    second = validate_spec("[]", lineage="doc-9", retry_ledger=ledger)
    assert first.status == "reject" and first.retry_allowed is True
    assert second.status == "reject" and second.retry_allowed is False
