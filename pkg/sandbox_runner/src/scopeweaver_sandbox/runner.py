"""Compile/import worker: one JSON request per line in, one response line out.

Each request carries module source; the worker byte-compiles it and, if that
succeeds, executes the module body in a throwaway namespace with the working
directory switched to an empty scratch dir and the standard streams detached
(module prints must not corrupt the protocol).  Exceptions map to error
classes by exception type name.  Wall-clock enforcement belongs to the host:
it kills the process, so nothing here installs timers.

The process is single-threaded and exits 0 when stdin closes; a nonzero exit
happens only on an internal failure of the worker itself.
"""

from __future__ import annotations

import contextlib
import io
import json
import os
import sys
import tempfile
import time

PROTOCOL_STAGE = "protocol"

_ERROR_CLASS_BY_EXCEPTION = {
    "SyntaxError": "SyntaxError",
    "IndentationError": "SyntaxError",
    "TabError": "SyntaxError",
    "ValueError": "SyntaxError",  # compile() rejects e.g. null bytes this way
    "NameError": "NameError",
    "UnboundLocalError": "NameError",
    "ImportError": "ImportError",
    "ModuleNotFoundError": "ImportError",
    "AttributeError": "AttributeError",
}


def classify(exc: BaseException) -> str:
    return _ERROR_CLASS_BY_EXCEPTION.get(type(exc).__name__, "Other")


def _stage(name: str, ok: bool, exc: BaseException | None = None, duration_ms: float = 0.0) -> dict:
    return {
        "name": name,
        "ok": ok,
        "error_class": None if ok else classify(exc),
        "message": None if ok else f"{type(exc).__name__}: {exc}",
        "duration_ms": round(duration_ms, 3),
    }


def _protocol_failure(request_id, message: str, duration_ms: float = 0.0) -> dict:
    return {
        "id": request_id,
        "stages": [
            {
                "name": PROTOCOL_STAGE,
                "ok": False,
                "error_class": "ProtocolError",
                "message": message,
                "duration_ms": 0.0,
            }
        ],
        "duration_ms": round(duration_ms, 3),
    }


def _parse_request(line: str):
    try:
        raw = json.loads(line)
    except ValueError as exc:
        return None, f"request is not valid JSON: {exc}"
    if not isinstance(raw, dict):
        return None, "request must be a JSON object"
    request_id = raw.get("id")
    if not isinstance(request_id, str) or not request_id:
        return None, "request id must be a non-empty string"
    source = raw.get("module_source")
    if not isinstance(source, str) or not source:
        return raw, "module_source must be a non-empty string"
    timeout = raw.get("timeout_s")
    if not isinstance(timeout, (int, float)) or isinstance(timeout, bool) or timeout <= 0:
        return raw, "timeout_s must be a positive number"
    return raw, None


@contextlib.contextmanager
def _scratch_sandbox():
    """Empty scratch cwd and detached standard streams for the module body."""
    scratch = tempfile.mkdtemp(prefix="sandbox-scratch-")
    old_cwd = os.getcwd()
    old_streams = sys.stdin, sys.stdout, sys.stderr
    os.chdir(scratch)
    sys.stdin = io.StringIO("")
    sys.stdout = io.StringIO()
    sys.stderr = io.StringIO()
    try:
        yield
    finally:
        sys.stdin, sys.stdout, sys.stderr = old_streams
        os.chdir(old_cwd)
        try:
            for name in os.listdir(scratch):
                try:
                    os.remove(os.path.join(scratch, name))
                except OSError:
                    pass
            os.rmdir(scratch)
        except OSError:
            pass


def handle_request(request: dict) -> dict:
    """Compile then import one module in a fresh namespace."""
    started = time.perf_counter()
    source = request["module_source"]
    stages = []
    t0 = time.perf_counter()
    try:
        code = compile(source, "<sandboxed_module>", "exec")
        stages.append(_stage("compile", True, duration_ms=(time.perf_counter() - t0) * 1000))
    except (SyntaxError, ValueError) as exc:
        stages.append(_stage("compile", False, exc, (time.perf_counter() - t0) * 1000))
        code = None
    if code is not None:
        namespace = {"__name__": "sandboxed_module", "__file__": "<sandboxed_module>"}
        t0 = time.perf_counter()
        try:
            with _scratch_sandbox():
                exec(code, namespace)
            stages.append(_stage("import", True, duration_ms=(time.perf_counter() - t0) * 1000))
        except BaseException as exc:  # module bodies may raise anything, even SystemExit
            stages.append(_stage("import", False, exc, (time.perf_counter() - t0) * 1000))
    return {
        "id": request["id"],
        "stages": stages,
        "duration_ms": round((time.perf_counter() - started) * 1000, 3),
    }


def serve(instream, outstream) -> None:
    """One response line per request line, until the input stream closes."""
    for line in instream:
        line = line.strip()
        if not line:
            continue
        raw, problem = _parse_request(line)
        if problem is not None:
            request_id = raw.get("id") if isinstance(raw, dict) else None
            response = _protocol_failure(request_id, problem)
        else:
            response = handle_request(raw)
        outstream.write(json.dumps(response) + "\n")
        outstream.flush()


def main() -> int:
    try:
        serve(sys.stdin, sys.stdout)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # internal failure only
        print(f"sandbox worker internal error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
