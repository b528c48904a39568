"""Staged validation of assembled modules and executability reporting.

Static checks (parse + unresolved-name analysis) run in-process.  Dynamic
checks (bytecode compile + import) are delegated to an external sandbox
worker over a one-request, line-delimited JSON protocol; the worker is a
separate component and nothing here runs unless it is explicitly asked for.
"""

from __future__ import annotations

import json
import os
import re
import shlex
import subprocess
import sys
import time
from dataclasses import dataclass, field

from .assembler import AssembledModule
from .resolver import analyze_unit
from .syntax import EncodingError, SourceSyntaxError, SourceUnit, parse_lossless

ERROR_CLASSES = (
    "SyntaxError",
    "NameError",
    "ImportError",
    "AttributeError",
    "Timeout",
    "SandboxFailure",
    "Other",
)

_CLASS_BY_EXCEPTION = {
    "SyntaxError": "SyntaxError",
    "IndentationError": "SyntaxError",
    "TabError": "SyntaxError",
    "NameError": "NameError",
    "UnboundLocalError": "NameError",
    "ImportError": "ImportError",
    "ModuleNotFoundError": "ImportError",
    "AttributeError": "AttributeError",
}

# packages the dynamic stage may assume are installed; an ImportError for
# anything outside this list is tagged as an external-dependency failure
DEFAULT_ALLOWLIST = tuple(sorted(set(getattr(sys, "stdlib_module_names", ())) | {"torch", "numpy"}))

_MISSING_MODULE_RE = re.compile(r"No module named '([^']+)'")


class ProtocolError(Exception):
    """The sandbox worker answered with something that is not a response."""


class JoinError(Exception):
    """A validation report does not join to any known candidate."""


def classify_exception(type_name: str) -> str:
    return _CLASS_BY_EXCEPTION.get(type_name, "Other")


@dataclass
class StageResult:
    name: str  # parse | compile | import
    ok: bool
    error_class: str | None = None
    message: str | None = None
    duration_ms: float = 0.0


@dataclass
class ValidationReport:
    target: str
    module_sha1: str
    stages: list[StageResult] = field(default_factory=list)
    unresolved: list[str] = field(default_factory=list)
    verdict: str = "admitted"

    @property
    def admitted(self) -> bool:
        return self.verdict == "admitted"

    @property
    def duration_ms(self) -> float:
        return sum(s.duration_ms for s in self.stages)

    def failing_stage(self) -> str | None:
        m = re.match(r"rejected\((\w+)\)", self.verdict)
        return m.group(1) if m else None

    def catalog_payload(self) -> dict:
        """Deterministic projection for the on-disk catalog (no timings)."""
        return {
            "qualname": self.target,
            "sha1": self.module_sha1,
            "verdict": self.verdict,
            "stages": [
                {"name": s.name, "ok": s.ok, "error_class": s.error_class} for s in self.stages
            ],
            "unresolved": list(self.unresolved),
        }


def _source_of(module) -> tuple[str, str, str]:
    if isinstance(module, AssembledModule):
        return module.source, module.sha1, module.target
    if isinstance(module, SourceUnit):
        return module.text(), module.sha1, module.path
    import hashlib

    text = module if isinstance(module, str) else bytes(module).decode("utf-8")
    return text, hashlib.sha1(text.encode("utf-8")).hexdigest(), ""


def static_unresolved_names(source: str) -> list[str]:
    """Names the module uses but never binds, with the module seen in isolation.

    Imports bind their targets, so only genuinely free names surface; when the
    module carries a star import the leftovers may legitimately come from it
    and are not reported.
    """
    unit = SourceUnit.from_bytes("<assembled>", source.encode("utf-8"))
    ana = analyze_unit(parse_lossless(unit))
    if ana.star_imports:
        return []
    missing: set[str] = set()
    for names in ana.unknown.values():
        missing.update(name for name, _deferred in names)
    return sorted(missing)


def validate_static(module, target: str | None = None) -> ValidationReport:
    """Parse stage plus unresolved-name analysis; failures are report content."""
    source, sha1, default_target = _source_of(module)
    report = ValidationReport(target=target or default_target, module_sha1=sha1)
    t0 = time.perf_counter()
    try:
        parse_lossless(SourceUnit.from_bytes("<assembled>", source.encode("utf-8")))
        ok, error_class, message = True, None, None
    except (SourceSyntaxError, EncodingError) as exc:
        kind = "SyntaxError" if isinstance(exc, SourceSyntaxError) else "Other"
        ok, error_class, message = False, kind, str(exc)
    duration = (time.perf_counter() - t0) * 1000
    report.stages.append(StageResult("parse", ok, error_class, message, duration))
    if not ok:
        report.verdict = "rejected(parse)"
        return report
    report.unresolved = static_unresolved_names(source)
    report.verdict = "admitted" if not report.unresolved else "rejected(resolve)"
    return report


def default_sandbox_command() -> list[str]:
    override = os.environ.get("SCOPEWEAVER_SANDBOX_CMD")
    if override:
        return shlex.split(override)
    return [sys.executable, "-m", "scopeweaver_sandbox"]


def validate_dynamic(module, budget_s: float = 30.0, command: list[str] | None = None,
                     target: str | None = None) -> ValidationReport:
    """Compile + import stages via one sandbox process for this one module."""
    source, sha1, default_target = _source_of(module)
    report = ValidationReport(target=target or default_target, module_sha1=sha1)
    cmd = command or default_sandbox_command()
    request = json.dumps({"id": "1", "module_source": source, "timeout_s": budget_s})
    t0 = time.perf_counter()
    try:
        proc = subprocess.Popen(
            cmd,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as exc:
        report.stages.append(StageResult("compile", False, "SandboxFailure", f"cannot launch sandbox: {exc}"))
        report.verdict = "rejected(compile)"
        return report
    try:
        out, err = proc.communicate(request + "\n", timeout=budget_s + 10.0)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait()
        elapsed = (time.perf_counter() - t0) * 1000
        report.stages.append(StageResult("import", False, "Timeout", f"no verdict within {budget_s}s", elapsed))
        report.verdict = "rejected(import)"
        return report
    elapsed = (time.perf_counter() - t0) * 1000
    line = out.splitlines()[0] if out.splitlines() else ""
    if not line:
        report.stages.append(
            StageResult("compile", False, "SandboxFailure", f"sandbox exited {proc.returncode}: {err.strip()[:500]}", elapsed)
        )
        report.verdict = "rejected(compile)"
        return report
    try:
        response = json.loads(line)
        stages = response["stages"]
        assert isinstance(stages, list)
    except (ValueError, KeyError, AssertionError) as exc:
        raise ProtocolError(f"malformed sandbox response: {line[:200]!r}") from exc
    if response.get("id") != "1":
        raise ProtocolError(f"sandbox answered for unknown request id {response.get('id')!r}")
    for stage in stages:
        try:
            report.stages.append(
                StageResult(
                    name=stage["name"],
                    ok=bool(stage["ok"]),
                    error_class=stage.get("error_class"),
                    message=stage.get("message"),
                    duration_ms=float(stage.get("duration_ms", 0.0)),
                )
            )
        except (KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed stage in sandbox response: {stage!r}") from exc
    failed = next((s for s in report.stages if not s.ok), None)
    report.verdict = f"rejected({failed.name})" if failed else "admitted"
    return report


def validate_module(module, *, dynamic: bool = False, budget_s: float = 30.0,
                    command: list[str] | None = None, target: str | None = None) -> ValidationReport:
    """Run the staged sequence; the first failing stage terminates it."""
    report = validate_static(module, target=target)
    if not dynamic or not report.admitted:
        return report
    dyn = validate_dynamic(module, budget_s=budget_s, command=command, target=target)
    report.stages.extend(dyn.stages)
    report.verdict = dyn.verdict
    return report


@dataclass
class ExecutabilityStats:
    total: int
    admitted: int
    rate: float
    per_category: dict[str, tuple[int, int]]  # category -> (total, admitted)
    failures: list[dict]
    external_only: int
    rate_external_adjusted: float

    def to_json(self) -> str:
        payload = {
            "total": self.total,
            "admitted": self.admitted,
            "rate": self.rate,
            "external_only": self.external_only,
            "rate_external_adjusted": self.rate_external_adjusted,
            "per_category": {
                cat: {"total": t, "admitted": a} for cat, (t, a) in self.per_category.items()
            },
            "failures": self.failures,
        }
        return json.dumps(payload, sort_keys=True) + "\n"


def _external_dependency_only(report: ValidationReport, allowlist) -> bool:
    stage = next((s for s in report.stages if not s.ok), None)
    if stage is None or stage.name != "import" or stage.error_class != "ImportError":
        return False
    match = _MISSING_MODULE_RE.search(stage.message or "")
    if not match:
        return False
    root = match.group(1).split(".")[0]
    return root not in allowlist


def executability_report(reports, candidates, allowlist=DEFAULT_ALLOWLIST) -> ExecutabilityStats:
    """Aggregate per-target verdicts into the executability summary."""
    by_qualname = {}
    for cand in candidates:
        by_qualname.setdefault(cand.qualname, cand)
    per_category: dict[str, list[int]] = {}
    failures = []
    admitted = 0
    external_only = 0
    for report in reports:
        cand = by_qualname.get(report.target)
        if cand is None:
            raise JoinError(f"report for '{report.target}' has no matching candidate")
        bucket = per_category.setdefault(cand.category, [0, 0])
        bucket[0] += 1
        if report.admitted:
            bucket[1] += 1
            admitted += 1
        else:
            tagged = _external_dependency_only(report, allowlist)
            external_only += 1 if tagged else 0
            failures.append(
                {
                    "qualname": report.target,
                    "stage": report.failing_stage(),
                    "error_class": next((s.error_class for s in report.stages if not s.ok), None),
                    "external_dependency": tagged,
                }
            )
    total = len(list(reports))
    failures.sort(key=lambda f: (f["qualname"], f["stage"] or ""))
    return ExecutabilityStats(
        total=total,
        admitted=admitted,
        rate=(admitted / total) if total else 0.0,
        per_category={cat: (t, a) for cat, (t, a) in sorted(per_category.items())},
        failures=failures,
        external_only=external_only,
        rate_external_adjusted=((admitted + external_only) / total) if total else 0.0,
    )


def definition_order_violations(source: str) -> list[str]:
    """Load-time uses that precede their bindings in an assembled module.

    Deferred (body-only) references are exempt; names carried by imports or
    builtins never violate.  Returns human-readable violation labels.
    """
    unit = SourceUnit.from_bytes("<assembled>", source.encode("utf-8"))
    ana = analyze_unit(parse_lossless(unit))
    violations = []
    for i, deps in ana.module_deps.items():
        for name, j, deferred in deps:
            if not deferred and j > i:
                violations.append(f"'{name}' used at statement {i} but bound at statement {j}")
    if not ana.star_imports:
        for i, names in ana.unknown.items():
            for name, deferred in names:
                if not deferred:
                    violations.append(f"'{name}' used at statement {i} but never bound")
    return violations
