"""Worker protocol behavior, driven through in-process streams."""

from __future__ import annotations

import io
import json

from scopeweaver_sandbox.runner import classify, handle_request, serve


def _roundtrip(*requests):
    lines = []
    for request in requests:
        lines.append(request if isinstance(request, str) else json.dumps(request))
    out = io.StringIO()
    serve(io.StringIO("\n".join(lines) + "\n"), out)
    return [json.loads(line) for line in out.getvalue().splitlines()]


def _req(request_id, source, timeout=5):
    return {"id": request_id, "module_source": source, "timeout_s": timeout}


def test_trivial_module_passes_both_stages():
    (response,) = _roundtrip(_req("1", "x = 1"))
    assert response["id"] == "1"
    assert [s["name"] for s in response["stages"]] == ["compile", "import"]
    assert all(s["ok"] for s in response["stages"])


def test_syntax_error_stops_before_import():
    (response,) = _roundtrip(_req("2", "def f(:"))
    assert [s["name"] for s in response["stages"]] == ["compile"]
    stage = response["stages"][0]
    assert not stage["ok"] and stage["error_class"] == "SyntaxError"


def test_undefined_name_fails_import_as_name_error():
    (response,) = _roundtrip(_req("3", "y = undefined_name"))
    compile_stage, import_stage = response["stages"]
    assert compile_stage["ok"]
    assert not import_stage["ok"] and import_stage["error_class"] == "NameError"


def test_missing_package_fails_import_as_import_error():
    (response,) = _roundtrip(_req("4", "import definitely_not_installed_zz"))
    assert response["stages"][1]["error_class"] == "ImportError"


def test_attribute_failure_classification():
    (response,) = _roundtrip(_req("5", "import json\njson.no_such_attr"))
    assert response["stages"][1]["error_class"] == "AttributeError"


def test_unknown_exceptions_map_to_other():
    (response,) = _roundtrip(_req("6", "raise RuntimeError('boom')"))
    assert response["stages"][1]["error_class"] == "Other"
    assert classify(ZeroDivisionError()) == "Other"


def test_system_exit_is_contained():
    (response,) = _roundtrip(_req("7", "import sys\nsys.exit(3)"))
    assert not response["stages"][1]["ok"]


def test_module_prints_do_not_corrupt_the_protocol():
    responses = _roundtrip(_req("8", "print('not a response line')"), _req("9", "x = 2"))
    assert [r["id"] for r in responses] == ["8", "9"]
    assert all(all(s["ok"] for s in r["stages"]) for r in responses)


def test_import_runs_in_empty_scratch_directory():
    source = "import os\nassert os.listdir('.') == [], os.listdir('.')\n"
    (response,) = _roundtrip(_req("10", source))
    assert response["stages"][1]["ok"], response


def test_fresh_namespace_per_request():
    # a name bound by one module is invisible to the next
    responses = _roundtrip(_req("11", "leaked = 41"), _req("12", "y = leaked + 1"))
    assert responses[0]["stages"][1]["ok"]
    assert responses[1]["stages"][1]["error_class"] == "NameError"


def test_same_verdict_in_shared_and_fresh_sessions():
    probe = _req("13", "y = leaked + 1")
    (fresh,) = _roundtrip(probe)
    shared = _roundtrip(_req("14", "leaked = 41"), probe)[1]
    assert fresh["stages"][1]["error_class"] == shared["stages"][1]["error_class"] == "NameError"


def test_malformed_json_yields_protocol_error():
    (response,) = _roundtrip("this is not json {")
    stage = response["stages"][0]
    assert stage["name"] == "protocol"
    assert not stage["ok"] and stage["error_class"] == "ProtocolError"


def test_missing_fields_yield_protocol_error():
    for request in (
        {"module_source": "x=1", "timeout_s": 5},
        {"id": "x", "timeout_s": 5},
        {"id": "x", "module_source": "", "timeout_s": 5},
        {"id": "x", "module_source": "x=1", "timeout_s": -1},
        json.dumps([1, 2]),
    ):
        (response,) = _roundtrip(request)
        assert response["stages"][0]["error_class"] == "ProtocolError", request


def test_blank_lines_are_ignored():
    out = io.StringIO()
    serve(io.StringIO('\n\n{"id":"1","module_source":"x=1","timeout_s":1}\n\n'), out)
    assert len(out.getvalue().splitlines()) == 1


def test_handle_request_reports_durations():
    response = handle_request(_req("15", "x = sum(range(10))"))
    assert response["duration_ms"] >= 0
    assert all(s["duration_ms"] >= 0 for s in response["stages"])
