"""Scope tables and LEGB name lookup."""

from __future__ import annotations

import pytest

from scopeweaver.resolver import resolve_name
from scopeweaver.scopes import ScopeError, build_scopes
from scopeweaver.syntax import SourceUnit, parse_lossless


def _table(source):
    return build_scopes(parse_lossless(SourceUnit.from_bytes("t.py", source.encode())))


def _scope_named(table, name):
    return next(s for s in table.scopes if s.name == name)


def test_import_alias_binds_in_module_scope():
    table = _table("import torch.nn as nn\n")
    sites = table.module_scope.bindings["nn"]
    assert sites[0].site_kind == "import"


def test_function_local_not_in_module_scope():
    table = _table("def f():\n    x = 1\n")
    assert "x" not in table.module_scope.bindings
    assert "x" in _scope_named(table, "f").bindings


def test_enclosing_function_scope_resolves_free_names():
    table = _table("def f():\n    x = 1\n    def g():\n        return x\n")
    g = _scope_named(table, "g")
    binding = resolve_name("x", g, table)
    assert binding.scope_kind == "enclosing"


def test_class_scope_is_not_enclosing_for_methods():
    table = _table("x = 0\n\nclass C:\n    x = 1\n    def m(self):\n        return x\n")
    m = _scope_named(table, "m")
    binding = resolve_name("x", m, table)
    assert binding.scope_kind == "global"


def test_class_body_sees_its_own_scope_first():
    table = _table("x = 0\n\nclass C:\n    x = 1\n    y = x\n")
    c = _scope_named(table, "C")
    assert resolve_name("x", c, table).scope_kind == "local"


def test_builtin_lookup():
    table = _table("def f(values):\n    return len(values)\n")
    binding = resolve_name("len", _scope_named(table, "f"), table)
    assert binding.scope_kind == "builtin"


def test_unresolved_is_a_value_not_an_error():
    table = _table("x = 1\n")
    assert resolve_name("missing", table.module_scope, table).scope_kind == "unresolved"


def test_global_declaration_rebinds_to_module():
    table = _table("def f():\n    global counter\n    counter = 1\n")
    assert "counter" in table.module_scope.bindings
    assert "counter" not in _scope_named(table, "f").bindings


def test_nonlocal_binds_into_enclosing_function():
    table = _table(
        "def f():\n    def g():\n        nonlocal x\n        x = 2\n    x = 1\n"
    )
    f = _scope_named(table, "f")
    assert len(f.bindings["x"]) == 2  # the plain assignment plus g's nonlocal write


def test_nonlocal_without_binding_is_a_scope_error():
    with pytest.raises(ScopeError):
        _table("def f():\n    def g():\n        nonlocal missing\n        missing = 1\n")


def test_comprehension_target_has_its_own_scope():
    table = _table("xs = [i for i in range(3)]\n")
    assert "i" not in table.module_scope.bindings
    comp = next(s for s in table.scopes if s.kind == "comprehension")
    assert "i" in comp.bindings


def test_walrus_in_comprehension_escapes_to_module():
    table = _table("ys = [(total := i) for i in range(3)]\n")
    assert "total" in table.module_scope.bindings


def test_parameters_bind_in_function_scope():
    table = _table("def f(a, *rest, b=1, **kw):\n    return a\n")
    f = _scope_named(table, "f")
    for name in ("a", "rest", "b", "kw"):
        assert f.bindings[name][0].site_kind == "parameter"


def test_lambda_parameters_scope():
    table = _table("g = lambda v: v + 1\n")
    lam = _scope_named(table, "<lambda>")
    assert "v" in lam.bindings


def test_bindings_from_branches_and_loops():
    table = _table(
        "try:\n    from fast import op\nexcept ImportError:\n    def op(x):\n        return x\n"
        "for item in (1, 2):\n    last = item\n"
        "with open('f') as fh:\n    data = fh\n"
    )
    for name in ("op", "item", "last", "fh", "data"):
        assert name in table.module_scope.bindings, name
