"""Structural gate for training-specification documents.

Accepts YAML or JSON, repairs representational issues (numeric strings, key
aliases, key order), rejects semantic ones (missing keys, bad ranges,
unknown optimizers), and emits a canonical JSON form.  A rejected document's
lineage may retry exactly once.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

import yaml

SCHEMA_VERSION = "1"

TOP_LEVEL_ORDER = (
    "task",
    "dataset",
    "metric",
    "epochs",
    "model_ref",
    "transform_ref",
    "loss",
    "optimizer",
    "hyperparameters",
)

HYPER_ORDER = ("learning_rate", "momentum", "weight_decay", "batch_size")

TOP_LEVEL_ALIASES = {
    "hyperparams": "hyperparameters",
    "hyper_parameters": "hyperparameters",
}

HYPER_ALIASES = {
    "lr": "learning_rate",
    "learning-rate": "learning_rate",
    "learningrate": "learning_rate",
    "mom": "momentum",
    "wd": "weight_decay",
    "weight-decay": "weight_decay",
    "weightdecay": "weight_decay",
    "bs": "batch_size",
    "batch-size": "batch_size",
    "batchsize": "batch_size",
}

KNOWN_OPTIMIZERS = (
    "adadelta",
    "adagrad",
    "adam",
    "adamw",
    "lbfgs",
    "nadam",
    "rmsprop",
    "sgd",
)

_STRING_FIELDS = ("task", "dataset", "metric", "model_ref", "transform_ref", "loss")


@dataclass
class TrainSpec:
    task: str
    dataset: str
    metric: str
    epochs: int
    model_ref: str
    transform_ref: str
    loss: str
    optimizer: str
    hyperparameters: dict

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in TOP_LEVEL_ORDER}
        hypers = dict(self.hyperparameters)
        ordered = {k: hypers.pop(k) for k in HYPER_ORDER if k in hypers}
        for k in sorted(hypers):
            ordered[k] = hypers[k]
        out["hyperparameters"] = ordered
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"


@dataclass
class GateOutcome:
    status: str  # pass | autofixed | reject
    fixes: list[dict] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    retry_allowed: bool = False
    spec: TrainSpec | None = None

    @property
    def canonical(self) -> str | None:
        return self.spec.canonical_json() if self.spec else None


def _parse_document(document):
    if isinstance(document, dict):
        return dict(document)
    if isinstance(document, bytes):
        document = document.decode("utf-8", errors="replace")
    try:
        value = json.loads(document)
    except ValueError:
        try:
            value = yaml.safe_load(document)
        except yaml.YAMLError:
            return None
    return value if isinstance(value, dict) else None


def _coerce_number(value):
    """Numeric value for a numeric-looking string, else None."""
    if not isinstance(value, str):
        return None
    text = value.strip()
    try:
        return int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError:
            return None


class _Gate:
    def __init__(self):
        self.fixes: list[dict] = []
        self.diagnostics: list[dict] = []

    def fix(self, path: str, rule: str, before, after) -> None:
        self.fixes.append({"path": path, "rule": rule, "found": before, "fixed": after})

    def reject(self, path: str, rule: str, found, expected) -> None:
        self.diagnostics.append({"path": path, "rule": rule, "found": found, "expected": expected})

    # -- field checks ------------------------------------------------------

    def check_string(self, doc: dict, key: str) -> None:
        value = doc.get(key)
        if not isinstance(value, str):
            self.reject(key, "Type", value, "string")
        elif not value.strip():
            self.reject(key, "Empty", value, "non-empty string")

    def check_epochs(self, doc: dict) -> None:
        value = doc.get("epochs")
        coerced = _coerce_number(value)
        if coerced is not None:
            self.fix("epochs", "StringToNumber", value, coerced)
            doc["epochs"] = value = coerced
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.reject("epochs", "Type", value, "positive integer")
            return
        if isinstance(value, float):
            if not value.is_integer():
                self.reject("epochs", "Type", value, "positive integer")
                return
            doc["epochs"] = value = int(value)
        if value < 1:
            self.reject("epochs", "Range", value, ">= 1")

    def check_optimizer(self, doc: dict) -> None:
        value = doc.get("optimizer")
        if not isinstance(value, str):
            self.reject("optimizer", "Type", value, "string")
            return
        canonical = value.strip().lower()
        if canonical not in KNOWN_OPTIMIZERS:
            self.reject("optimizer", "UnknownOptimizer", value, list(KNOWN_OPTIMIZERS))
            return
        if canonical != value:
            self.fix("optimizer", "CanonicalCase", value, canonical)
            doc["optimizer"] = canonical

    def check_hyperparameters(self, doc: dict) -> None:
        hypers = doc.get("hyperparameters")
        if not isinstance(hypers, dict):
            self.reject("hyperparameters", "Type", hypers, "mapping")
            return
        renamed: dict = {}
        for key, value in hypers.items():
            canonical = HYPER_ALIASES.get(str(key).lower(), key)
            if canonical != key:
                if canonical in hypers or canonical in renamed:
                    self.reject(f"hyperparameters.{key}", "DuplicateKey", key, canonical)
                    continue
                self.fix(f"hyperparameters.{key}", "KeyAlias", key, canonical)
            renamed[canonical] = value
        hypers = renamed

        for key in HYPER_ORDER:
            if key not in hypers:
                self.reject(f"hyperparameters.{key}", "MissingKey", None, "present")
        if self.diagnostics:
            doc["hyperparameters"] = hypers
            return

        for key in HYPER_ORDER:
            value = hypers[key]
            coerced = _coerce_number(value)
            if coerced is not None:
                self.fix(f"hyperparameters.{key}", "StringToNumber", value, coerced)
                hypers[key] = value = coerced
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.reject(f"hyperparameters.{key}", "Type", value, "number")
        if self.diagnostics:
            doc["hyperparameters"] = hypers
            return

        lr = hypers["learning_rate"]
        if not 0 < lr <= 1:
            self.reject("hyperparameters.learning_rate", "Range", lr, "(0, 1]")
        else:
            hypers["learning_rate"] = float(lr)
        momentum = hypers["momentum"]
        if not 0 <= momentum < 1:
            self.reject("hyperparameters.momentum", "Range", momentum, "[0, 1)")
        else:
            hypers["momentum"] = float(momentum)
        decay = hypers["weight_decay"]
        if not 0 <= decay < 1:
            self.reject("hyperparameters.weight_decay", "Range", decay, "[0, 1)")
        else:
            hypers["weight_decay"] = float(decay)
        batch = hypers["batch_size"]
        if isinstance(batch, float):
            if batch.is_integer():
                hypers["batch_size"] = batch = int(batch)
            else:
                self.reject("hyperparameters.batch_size", "Type", batch, "positive integer")
        if isinstance(batch, int) and batch < 1:
            self.reject("hyperparameters.batch_size", "Range", batch, ">= 1")

        canonical_keys = [k for k in HYPER_ORDER if k in hypers]
        canonical_keys += sorted(k for k in hypers if k not in HYPER_ORDER)
        if list(hypers) != canonical_keys:
            self.fix("hyperparameters", "KeyOrder", list(hypers), canonical_keys)
        doc["hyperparameters"] = {k: hypers[k] for k in canonical_keys}


def validate_spec(document, *, lineage: str | None = None, retry_ledger: "RetryLedger | None" = None) -> GateOutcome:
    """Gate one document: pass it, repair it, or reject it with diagnostics."""
    gate = _Gate()
    doc = _parse_document(document)
    if doc is None:
        outcome = GateOutcome(
            status="reject",
            diagnostics=[{"path": "", "rule": "NotStructured", "found": None, "expected": "YAML or JSON mapping"}],
        )
        outcome.retry_allowed = _consume_retry(lineage, retry_ledger)
        return outcome

    for key in list(doc):
        canonical = TOP_LEVEL_ALIASES.get(str(key).lower(), key)
        if canonical != key:
            if canonical in doc:
                gate.reject(key, "DuplicateKey", key, canonical)
            else:
                gate.fix(key, "KeyAlias", key, canonical)
                doc[canonical] = doc.pop(key)

    for key in TOP_LEVEL_ORDER:
        if key not in doc:
            gate.reject(key, "MissingKey", None, "present")
    for key in doc:
        if key not in TOP_LEVEL_ORDER:
            gate.reject(key, "UnknownKey", key, list(TOP_LEVEL_ORDER))
    if not gate.diagnostics:
        for key in _STRING_FIELDS:
            gate.check_string(doc, key)
        gate.check_epochs(doc)
        gate.check_optimizer(doc)
        gate.check_hyperparameters(doc)
        if list(doc) != [k for k in TOP_LEVEL_ORDER if k in doc]:
            gate.fix("", "KeyOrder", list(doc), list(TOP_LEVEL_ORDER))

    if gate.diagnostics:
        outcome = GateOutcome(status="reject", fixes=gate.fixes, diagnostics=gate.diagnostics)
        outcome.retry_allowed = _consume_retry(lineage, retry_ledger)
        return outcome

    spec = TrainSpec(
        task=doc["task"],
        dataset=doc["dataset"],
        metric=doc["metric"],
        epochs=doc["epochs"],
        model_ref=doc["model_ref"],
        transform_ref=doc["transform_ref"],
        loss=doc["loss"],
        optimizer=doc["optimizer"],
        hyperparameters=doc["hyperparameters"],
    )
    status = "autofixed" if gate.fixes else "pass"
    return GateOutcome(status=status, fixes=gate.fixes, spec=spec)


def _consume_retry(lineage, ledger) -> bool:
    if lineage is not None and ledger is not None:
        return retry_gate_allowed(lineage, ledger)
    return True  # a fresh, untracked rejection may retry once by definition


class RetryLedger:
    """Counts rejections per lineage; atomic like the dedup store."""

    def __init__(self, path: str | None = None):
        self.path = path
        self._lock = threading.Lock()
        self._counts: dict[str, int] = {}
        if path and os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        try:
                            entry = json.loads(line)
                            self._counts[entry["lineage"]] = int(entry["rejections"])
                        except (ValueError, KeyError):
                            continue

    def rejections(self, lineage: str) -> int:
        with self._lock:
            return self._counts.get(lineage, 0)

    def record_rejection(self, lineage: str) -> int:
        """Returns the rejection count before this one (0 = first)."""
        with self._lock:
            before = self._counts.get(lineage, 0)
            self._counts[lineage] = before + 1
            if self.path:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"lineage": lineage, "rejections": before + 1}) + "\n")
            return before


def retry_gate_allowed(lineage: str, ledger: RetryLedger) -> bool:
    return ledger.record_rejection(lineage) == 0


def retry_gate(outcome: GateOutcome, lineage: str, ledger: RetryLedger) -> str:
    """First rejection of a lineage earns one retry; everything after is denied."""
    if outcome.status != "reject":
        raise ValueError("retry_gate applies to rejected outcomes only")
    return "allow" if retry_gate_allowed(lineage, ledger) else "deny"
