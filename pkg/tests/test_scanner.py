"""Candidate discovery, eligibility, and categorization."""

from __future__ import annotations

import shutil

from scopeweaver.scanner import BlockCandidate, ScanConfig, classify_category, scan
from scopeweaver.store import IndexStore
from tests.conftest import MINI_CORPUS


def _cand(name):
    return BlockCandidate(
        qualname=f"m.{name}", unit_path="m.py", span=(0, 1), kind="class", name=name,
        bases=("nn.Module",), has_forward=True, is_abstract=False, eligible=True,
        category="utilities", stmt_index=0,
    )


def test_candidates_match_hand_enumeration(corpus_index, corpus_truth):
    expected = corpus_truth["candidates"]
    seen: dict[str, list] = {}
    for cand in corpus_index.candidates:
        seen.setdefault(cand.unit_path, []).append([cand.name, cand.kind, cand.eligible])
    assert seen == expected


def test_unit_and_failure_counts(corpus_index, corpus_truth):
    assert len(corpus_index.units) == corpus_truth["units"]
    failures = {f.path: f.error_class for f in corpus_index.parse_failures}
    assert failures == corpus_truth["parse_failures"]
    eligible = sum(1 for c in corpus_index.candidates if c.eligible)
    assert eligible == corpus_truth["eligible_total"]


def test_simple_module_subclass_is_eligible(corpus_index):
    net = next(c for c in corpus_index.candidates if c.name == "PlainReLU")
    assert net.eligible and net.has_forward and not net.is_abstract


def test_abstract_base_is_ineligible(corpus_index):
    base = next(c for c in corpus_index.candidates if c.name == "AbstractBlock")
    assert base.is_abstract and base.has_forward and not base.eligible


def test_raising_forward_is_not_abstract(corpus_index):
    cand = next(c for c in corpus_index.candidates if c.name == "RaisingForward")
    assert cand.eligible and not cand.is_abstract


def test_transitive_subclass_eligibility(corpus_index):
    # ResidualUnit subclasses an in-index block, not the base pattern directly
    cand = next(c for c in corpus_index.candidates if c.name == "ResidualUnit")
    assert cand.eligible
    # through an abstract intermediary too
    concrete = next(c for c in corpus_index.candidates if c.name == "ConcreteBlock")
    assert concrete.eligible


def test_forward_must_be_defined_directly(corpus_index):
    clash = next(c for c in corpus_index.candidates if c.name == "ClashNet")
    assert not clash.has_forward and not clash.eligible


def test_category_rules():
    assert classify_category(_cand("MultiHeadAttention")) == "attention"
    assert classify_category(_cand("FocalLoss")) == "losses"
    assert classify_category(_cand("FooBarHelper")) == "utilities"
    assert classify_category(_cand("DeformConv")) == "convolutions"
    assert classify_category(_cand("SwinTransformerBlock")) == "transformer_blocks"
    assert classify_category(_cand("AdaptiveAvgPool2d")) == "pooling"
    assert classify_category(_cand("BatchNorm2d")) == "normalization"
    assert classify_category(_cand("ResNet")) == "architectures"


def test_scan_determinism_across_runs(tmp_path):
    a = scan([str(MINI_CORPUS)])
    b = scan([str(MINI_CORPUS)])
    digest_a = IndexStore(str(tmp_path / "a")).write_index(a)
    digest_b = IndexStore(str(tmp_path / "b")).write_index(b)
    assert digest_a == digest_b


def test_removing_a_file_never_adds_candidates(tmp_path):
    src = tmp_path / "corpus"
    shutil.copytree(MINI_CORPUS, src)
    full = scan([str(src)])
    (src / "cv_blocks" / "conv" / "blocks.py").unlink()
    reduced = scan([str(src)])
    full_names = {c.qualname for c in full.candidates}
    reduced_names = {c.qualname for c in reduced.candidates}
    assert reduced_names <= full_names


def test_empty_roots_give_empty_index(tmp_path):
    index = scan([str(tmp_path)])
    assert not index.units and not index.candidates


def test_multiple_roots_prefix_paths(tmp_path):
    for name in ("alpha", "beta"):
        d = tmp_path / name
        d.mkdir()
        (d / "mod.py").write_text("class Net:\n    pass\n")
    index = scan([str(tmp_path / "alpha"), str(tmp_path / "beta")])
    assert set(index.units) == {"alpha/mod.py", "beta/mod.py"}


def test_config_file_round_trip(tmp_path):
    cfg = tmp_path / "scan.json"
    cfg.write_text(
        '{"base_patterns": ["nn.Module"], '
        '"category_rules": [{"pattern": "Gate", "category": "attention"}], '
        '"extensions": [".py"]}'
    )
    config = ScanConfig.from_file(str(cfg))
    assert config.base_patterns == ("nn.Module",)
    assert classify_category(_cand("HighwayGate"), config.category_rules) == "attention"


def test_every_eligible_candidate_matches_base_pattern_after_aliasing(corpus_index):
    # eligibility always traces back to a configured base pattern through the
    # file's import aliases, possibly via other in-index candidates
    by_key = {(c.unit_path, c.name): c for c in corpus_index.candidates if c.kind == "class"}

    def traces(cand, seen):
        if (cand.unit_path, cand.name) in seen:
            return False
        seen.add((cand.unit_path, cand.name))
        for base in cand.bases:
            if base in ("nn.Module", "torch.nn.Module", "Module"):
                return True
            tail = base.split(".")[-1]
            parent = by_key.get((cand.unit_path, tail))
            if parent and traces(parent, seen):
                return True
            for other in corpus_index.candidates:
                if other.kind == "class" and other.name == tail and traces(other, seen):
                    return True
        return False

    for cand in corpus_index.candidates:
        if cand.eligible:
            assert traces(cand, set()), cand.qualname
