from __future__ import annotations

import json
from pathlib import Path

import pytest

from scopeweaver.scanner import scan


def repo_root() -> Path:
    current = Path(__file__).resolve()
    for parent in current.parents:
        if (parent / "pyproject.toml").exists():
            return parent
    raise FileNotFoundError("repository root not found")


MINI_CORPUS = repo_root() / "mini_corpus"
FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def corpus_index():
    return scan([str(MINI_CORPUS)])


@pytest.fixture(scope="session")
def closure_ground_truth():
    with open(FIXTURES / "closure_ground_truth.json", "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def corpus_truth():
    with open(FIXTURES / "corpus_truth.json", "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def golden_tinyresnet() -> str:
    with open(FIXTURES / "golden_TinyResNet.py", "r", encoding="utf-8", newline="") as fh:
        return fh.read()
