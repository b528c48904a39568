"""Command-line front end for batch pipelines and CI.

Exit codes: 0 success (for dedupe: all inputs new; for spec-check: pass or
autofixed), 1 internal or I/O error, 2 bad target or usage, 3 duplicate seen
by dedupe, 4 spec-check rejection.  Data goes to stdout, diagnostics to
stderr as JSON objects.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .assembler import CycleError, NameCollision, UnresolvedNamesError, assemble
from .dedup import DedupStore, fingerprint
from .resolver import AmbiguousTarget, TargetNotFound, closure, find_target
from .scanner import ScanConfig, scan
from .specgate import RetryLedger, validate_spec
from .store import IndexStore, StoreError
from .validation import ProtocolError, executability_report, validate_module

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TARGET = 2
EXIT_DUPLICATE = 3
EXIT_REJECT = 4


def _diag(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _emit(payload: dict, as_json: bool, human: str | None = None) -> None:
    if as_json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(human if human is not None else json.dumps(payload, sort_keys=True, indent=2))


def _manifest_dir(index_dir: str | None) -> str:
    env = os.environ.get("SCOPEWEAVER_MANIFEST_DIR")
    if env:
        return env
    if index_dir:
        return os.path.join(index_dir, "manifests")
    return os.path.join(".", ".scopeweaver", "manifests")


def _write_manifest(command: str, args: argparse.Namespace, exit_status: int,
                    started: str, config_digest: str | None, index_digest: str | None) -> None:

    directory = _manifest_dir(getattr(args, "index", None))
    try:
        os.makedirs(directory, exist_ok=True)
        payload = {
            "command": command,
            "arguments": [a for a in sys.argv[1:]],
            "config_digest": config_digest,
            "index_digest": index_digest,
            "started_at": started,
            "finished_at": _now(),
            "exit_status": exit_status,
        }
        name = f"{command}-{os.getpid()}-{time.monotonic_ns()}.json"
        with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        _diag({"warning": f"manifest not written: {exc}"})


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _file_digest(path: str | None) -> str | None:
    if not path:
        return None
    try:
        with open(path, "rb") as fh:
            return hashlib.sha1(fh.read()).hexdigest()
    except OSError:
        return None


def _load_config(path: str | None) -> ScanConfig:
    return ScanConfig.from_file(path) if path else ScanConfig()


# -- commands ---------------------------------------------------------------


def cmd_scan(args) -> int:
    config = _load_config(args.config)
    index = scan(args.roots, config)
    store = IndexStore(args.index)
    digest = store.write_index(index)
    eligible = sum(1 for c in index.candidates if c.eligible)
    _emit(
        {
            "units": len(index.units),
            "parse_failures": len(index.parse_failures),
            "candidates": len(index.candidates),
            "eligible": eligible,
            "catalog_digest": digest,
        },
        args.json,
        human=(
            f"scanned {len(index.units)} units ({len(index.parse_failures)} unparseable), "
            f"{len(index.candidates)} candidates ({eligible} eligible)\n"
            f"catalog digest {digest}"
        ),
    )
    return EXIT_OK


def cmd_extract(args) -> int:
    store = IndexStore(args.index)
    index = store.load_index()
    target = find_target(index, args.target)
    result = closure(index, target)
    module = assemble(
        result,
        index,
        allow_unresolved=args.allow_unresolved,
        preamble=args.preamble,
        index_digest=store.catalog_digest(),
    )
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, f"{target.name}.py")
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(module.source)
    sidecar = os.path.join(args.out, f"{target.name}.provenance.json")
    with open(sidecar, "w", encoding="utf-8", newline="") as fh:
        json.dump(module.provenance_payload(), fh, sort_keys=True)
        fh.write("\n")
    store.append_record(
        "closure",
        {
            "qualname": target.qualname,
            "definitions": result.definition_labels(),
            "imports": result.imports,
            "unresolved": result.unresolved,
            "external": result.external,
        },
    )
    store.append_record("module", {"qualname": target.qualname, "sha1": module.sha1})
    for warning in result.warnings:
        _diag({"warning": warning})
    _emit(
        {
            "target": target.qualname,
            "module": out_path,
            "sha1": module.sha1,
            "definitions": len(result.definitions),
            "imports": result.imports,
            "unresolved": result.unresolved,
        },
        args.json,
        human=f"wrote {out_path} ({len(result.definitions)} definitions, sha1 {module.sha1})",
    )
    return EXIT_OK


def _iter_validation_targets(args, store: IndexStore, index):
    if args.all:
        for cand in index.candidates:
            if cand.eligible:
                try:
                    result = closure(index, cand)
                    module = assemble(result, index, allow_unresolved=True)
                except (CycleError, NameCollision) as exc:
                    # the module never came into being; count the target as
                    # rejected up front rather than aborting the batch
                    yield cand.qualname, exc
                    continue
                yield cand.qualname, module
    else:
        for path in args.modules:
            with open(path, "r", encoding="utf-8") as fh:
                source = fh.read()
            qualname = os.path.splitext(os.path.basename(path))[0]
            sidecar = os.path.splitext(path)[0] + ".provenance.json"
            if os.path.exists(sidecar):
                with open(sidecar, "r", encoding="utf-8") as fh:
                    qualname = json.load(fh).get("target", qualname)
            yield qualname, source


def cmd_validate(args) -> int:
    store = IndexStore(args.index)
    index = store.load_index()
    pairs = list(_iter_validation_targets(args, store, index))

    def run(pair):
        qualname, module = pair
        if isinstance(module, Exception):
            from .validation import StageResult, ValidationReport

            return ValidationReport(
                target=qualname,
                module_sha1="",
                stages=[StageResult("parse", False, "Other", f"assembly failed: {module}")],
                verdict="rejected(parse)",
            )
        return validate_module(module, dynamic=args.dynamic, budget_s=args.timeout, target=qualname)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(run, pairs))
    else:
        reports = [run(p) for p in pairs]
    admitted = 0
    for report in reports:
        store.append_record("report", report.catalog_payload())
        admitted += 1 if report.admitted else 0
    _emit(
        {
            "validated": len(reports),
            "admitted": admitted,
            "rejected": len(reports) - admitted,
            "dynamic": args.dynamic,
        },
        args.json,
        human=f"validated {len(reports)} modules: {admitted} admitted, {len(reports) - admitted} rejected",
    )
    return EXIT_OK


def cmd_report(args) -> int:
    store = IndexStore(args.index)
    index = store.load_index()
    from .validation import StageResult, ValidationReport

    reports = []
    for record in store.records("report"):
        reports.append(
            ValidationReport(
                target=record["qualname"],
                module_sha1=record["sha1"],
                stages=[
                    StageResult(s["name"], s["ok"], s.get("error_class")) for s in record["stages"]
                ],
                unresolved=record.get("unresolved", []),
                verdict=record["verdict"],
            )
        )
    stats = executability_report(reports, index.candidates)
    payload = stats.to_json()
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)
    _emit(
        json.loads(payload),
        args.json,
        human=(
            f"{stats.admitted}/{stats.total} admitted "
            f"(rate {stats.rate:.3f}); wrote {args.out}"
        ),
    )
    return EXIT_OK


def cmd_dedupe(args) -> int:
    store = DedupStore(args.store)
    any_duplicate = False
    results = []
    for path in args.files:
        with open(path, "rb") as fh:
            digest = fingerprint(fh.read())
        status, record = store.check_and_insert(digest, module_id=path)
        any_duplicate |= status == "duplicate"
        results.append(
            {
                "file": path,
                "digest": digest,
                "status": status,
                "first_seen": record.first_seen,
                "hit_count": record.hit_count,
            }
        )
    for entry in results:
        _emit(entry, args.json, human=f"{entry['status']:9s} {entry['digest']}  {entry['file']}")
    return EXIT_DUPLICATE if any_duplicate else EXIT_OK


def cmd_spec_check(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        document = fh.read()
    ledger = RetryLedger(args.retry_store) if args.retry_store else None
    outcome = validate_spec(document, lineage=args.lineage, retry_ledger=ledger)
    payload = {
        "status": outcome.status,
        "fixes": outcome.fixes,
        "diagnostics": outcome.diagnostics,
        "retry_allowed": outcome.retry_allowed,
        "canonical": outcome.canonical,
    }
    _emit(payload, args.json)
    return EXIT_OK if outcome.status in ("pass", "autofixed") else EXIT_REJECT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scopeweaver",
        description="Extract self-contained neural-network blocks from source corpora.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="index repository roots")
    p.add_argument("roots", nargs="+")
    p.add_argument("--index", required=True, help="index directory to write")
    p.add_argument("--config", help="ScanConfig JSON file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("extract", help="emit a self-contained module for a target")
    p.add_argument("target", help="bare name, dotted qualname, or path::Name")
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--allow-unresolved", action="store_true")
    p.add_argument("--preamble", action="store_true", help="prepend a provenance comment")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("validate", help="validate assembled modules")
    p.add_argument("modules", nargs="*", help="module files (omit with --all)")
    p.add_argument("--all", action="store_true", help="validate every eligible candidate")
    p.add_argument("--index", required=True)
    p.add_argument("--dynamic", action="store_true", help="also run sandboxed compile+import")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="write the executability report")
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("dedupe", help="fingerprint files against a digest store")
    p.add_argument("files", nargs="+")
    p.add_argument("--store", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dedupe)

    p = sub.add_parser("spec-check", help="gate a training-specification document")
    p.add_argument("file")
    p.add_argument("--lineage", help="document lineage id for retry accounting")
    p.add_argument("--retry-store", help="retry ledger file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spec_check)
    return parser


_ERROR_EXITS = (
    (TargetNotFound, "TargetNotFound", EXIT_TARGET),
    (AmbiguousTarget, "AmbiguousTarget", EXIT_TARGET),
    (UnresolvedNamesError, "UnresolvedNames", EXIT_TARGET),
    (NameCollision, "NameCollision", EXIT_TARGET),
    (CycleError, "CycleError", EXIT_TARGET),
    (StoreError, "StoreError", EXIT_ERROR),
    (ProtocolError, "ProtocolError", EXIT_ERROR),
    (OSError, "IoError", EXIT_ERROR),
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = _now()
    config_digest = _file_digest(getattr(args, "config", None))
    try:
        status = args.func(args)
    except tuple(e[0] for e in _ERROR_EXITS) as exc:
        for exc_type, label, code in _ERROR_EXITS:
            if isinstance(exc, exc_type):
                _diag({"error": label, "message": str(exc)})
                status = code
                break
    index_digest = None
    if getattr(args, "index", None):
        index_digest = IndexStore(args.index).catalog_digest()
    _write_manifest(args.command, args, status, started, config_digest, index_digest)
    return status


if __name__ == "__main__":
    sys.exit(main())
