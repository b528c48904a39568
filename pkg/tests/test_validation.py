"""Static validation stages and executability reporting."""

from __future__ import annotations

import json

import pytest

from scopeweaver.assembler import assemble
from scopeweaver.resolver import closure, find_target
from scopeweaver.scanner import BlockCandidate
from scopeweaver.validation import (
    JoinError,
    ValidationReport,
    StageResult,
    classify_exception,
    definition_order_violations,
    executability_report,
    static_unresolved_names,
    validate_static,
)

WELL_FORMED = "import math\n\ndef area(r):\n    return math.pi * r * r\n\nclass Disc:\n    unit = area(1.0)\n"


def _candidate(qualname, category="utilities"):
    name = qualname.rsplit(".", 1)[-1]
    return BlockCandidate(
        qualname=qualname, unit_path="x.py", span=(0, 1), kind="class", name=name,
        bases=(), has_forward=True, is_abstract=False, eligible=True,
        category=category, stmt_index=0,
    )


def _report(qualname, verdict="admitted", stage=None, error=None, message=None):
    stages = [StageResult("parse", True)]
    if stage:
        stages.append(StageResult(stage, False, error, message))
    return ValidationReport(target=qualname, module_sha1="0" * 40, stages=stages, verdict=verdict)


def test_well_formed_module_is_admitted():
    report = validate_static(WELL_FORMED)
    assert report.verdict == "admitted"
    assert report.stages[0].name == "parse" and report.stages[0].ok
    assert report.unresolved == []


def test_deleted_helper_shows_up_as_unresolved():
    broken = WELL_FORMED.replace("def area(r):\n    return math.pi * r * r\n\n", "")
    report = validate_static(broken)
    assert report.stages[0].ok  # it still parses
    assert report.unresolved == ["area"]
    assert report.verdict == "rejected(resolve)"


def test_broken_indentation_fails_the_parse_stage():
    report = validate_static("def f():\nreturn 1\n")
    assert not report.stages[0].ok
    assert report.stages[0].error_class == "SyntaxError"
    assert report.verdict == "rejected(parse)"


def test_star_imports_absorb_unknown_names():
    assert static_unresolved_names("from torch.nn.functional import *\n\ny = relu\n") == []


def test_exception_classification_taxonomy():
    assert classify_exception("SyntaxError") == "SyntaxError"
    assert classify_exception("IndentationError") == "SyntaxError"
    assert classify_exception("NameError") == "NameError"
    assert classify_exception("ModuleNotFoundError") == "ImportError"
    assert classify_exception("AttributeError") == "AttributeError"
    assert classify_exception("RuntimeError") == "Other"


def test_definition_order_checker_flags_seeded_reorder():
    good = "class B:\n    pass\n\nclass A(B):\n    pass\n"
    bad = "class A(B):\n    pass\n\nclass B:\n    pass\n"
    assert definition_order_violations(good) == []
    violations = definition_order_violations(bad)
    assert violations and "'B'" in violations[0]


def test_definition_order_ignores_deferred_uses():
    source = "def f():\n    return helper()\n\ndef helper():\n    return 1\n"
    assert definition_order_violations(source) == []


def test_assembled_corpus_modules_have_zero_order_violations(corpus_index, closure_ground_truth):
    for qualname in closure_ground_truth:
        module = assemble(
            closure(corpus_index, find_target(corpus_index, qualname)), corpus_index
        )
        assert definition_order_violations(module.source) == [], qualname


def test_reference_scale_totals_reproduce_the_pinned_rate():
    # reference verdict distribution pinned by the report-format fixture
    sizes = {
        "attention": 180, "convolutions": 220, "transformer_blocks": 150,
        "pooling": 110, "normalization": 100, "losses": 90,
        "architectures": 150, "utilities": 289,
    }
    assert sum(sizes.values()) == 1289
    rejected_quota = 1289 - 941
    candidates, reports = [], []
    counter = 0
    for category, size in sorted(sizes.items()):
        for i in range(size):
            qualname = f"{category}.Block{i}"
            candidates.append(_candidate(qualname, category))
            if counter < rejected_quota:
                reports.append(_report(qualname, "rejected(import)", "import", "NameError", "boom"))
            else:
                reports.append(_report(qualname))
            counter += 1
    stats = executability_report(reports, candidates)
    assert stats.total == 1289
    assert stats.admitted == 941
    assert round(stats.rate, 3) == 0.730
    assert sum(t for t, _ in stats.per_category.values()) == 1289
    assert sum(a for _, a in stats.per_category.values()) == 941


def test_empty_input_convention():
    stats = executability_report([], [])
    assert stats.total == 0 and stats.admitted == 0 and stats.rate == 0.0


def test_fixture_oracle_rate():
    # hand count: 3 of 4 admitted
    candidates = [_candidate(f"m.B{i}") for i in range(4)]
    reports = [
        _report("m.B0"),
        _report("m.B1"),
        _report("m.B2", "rejected(import)", "import", "ImportError", "No module named 'weird_pkg'"),
        _report("m.B3"),
    ]
    stats = executability_report(reports, candidates)
    assert stats.total == 4 and stats.admitted == 3
    assert stats.rate == pytest.approx(0.75)
    assert stats.failures == [
        {
            "qualname": "m.B2",
            "stage": "import",
            "error_class": "ImportError",
            "external_dependency": True,
        }
    ]
    assert stats.external_only == 1
    assert stats.rate_external_adjusted == pytest.approx(1.0)


def test_allowlisted_import_failure_is_not_tagged_external():
    candidates = [_candidate("m.B0")]
    reports = [_report("m.B0", "rejected(import)", "import", "ImportError", "No module named 'torch'")]
    stats = executability_report(reports, candidates)
    assert stats.failures[0]["external_dependency"] is False


def test_dangling_report_is_a_join_error():
    with pytest.raises(JoinError):
        executability_report([_report("ghost.Block")], [_candidate("m.B0")])


def test_report_json_is_canonical():
    stats = executability_report([_report("m.B0")], [_candidate("m.B0")])
    payload = stats.to_json()
    assert payload.endswith("\n")
    parsed = json.loads(payload)
    assert list(parsed) == sorted(parsed)
    assert parsed["total"] == 1 and parsed["admitted"] == 1 and parsed["rate"] == 1.0
