"""Introspection of import statements and module-path arithmetic."""

from __future__ import annotations

import ast
from dataclasses import dataclass


@dataclass(frozen=True)
class ImportedName:
    """One name an import statement binds in the importing module."""

    local: str          # name bound locally ("*" for star imports)
    module: str | None  # source module as written (None for "from . import x")
    orig: str | None    # original name inside the source module, None for plain import
    level: int          # relative-import level, 0 = absolute
    is_star: bool
    binds_module: bool  # the local name is a module object, not a member
    has_alias: bool     # an "as" clause renamed it


def import_bindings(stmt: ast.stmt) -> list[ImportedName]:
    out: list[ImportedName] = []
    if isinstance(stmt, ast.Import):
        for alias in stmt.names:
            if alias.asname:
                out.append(ImportedName(alias.asname, alias.name, None, 0, False, True, True))
            else:
                # "import a.b" binds only the root name "a"
                out.append(ImportedName(alias.name.split(".")[0], alias.name, None, 0, False, True, False))
    elif isinstance(stmt, ast.ImportFrom):
        for alias in stmt.names:
            if alias.name == "*":
                out.append(ImportedName("*", stmt.module, None, stmt.level, True, False, False))
            else:
                out.append(
                    ImportedName(
                        alias.asname or alias.name,
                        stmt.module,
                        alias.name,
                        stmt.level,
                        False,
                        False,
                        alias.asname is not None and alias.asname != alias.name,
                    )
                )
    return out


def unit_module_path(unit_path: str) -> str:
    """Dotted module path for a repo-relative file path."""
    path = unit_path.replace("\\", "/")
    if path.endswith(".py"):
        path = path[:-3]
    parts = [p for p in path.split("/") if p]
    if parts and parts[-1] == "__init__":
        parts = parts[:-1]
    return ".".join(parts)


def unit_package_path(unit_path: str) -> str:
    """Dotted package containing a unit ('' for a top-level module)."""
    module = unit_module_path(unit_path)
    if unit_path.replace("\\", "/").endswith("/__init__.py"):
        return module
    return module.rsplit(".", 1)[0] if "." in module else ""


def resolve_import_module(unit_path: str, module: str | None, level: int) -> str | None:
    """Absolute dotted path of an import's source module, None if it escapes the tree."""
    if level == 0:
        return module
    base = unit_package_path(unit_path)
    parts = base.split(".") if base else []
    hops = level - 1
    if hops > len(parts):
        return None
    if hops:
        parts = parts[:-hops]
    if module:
        parts.extend(module.split("."))
    return ".".join(parts) if parts else None


def alias_map(stmts, unit_path: str | None = None) -> dict[str, str]:
    """Map each locally bound import name to the absolute dotted thing it denotes.

    "import torch.nn as nn" yields {"nn": "torch.nn"}; "from torch import nn"
    yields {"nn": "torch.nn"}.  Relative imports resolve against ``unit_path``
    when given.  Star imports are skipped.
    """
    out: dict[str, str] = {}
    for stmt in stmts:
        for b in import_bindings(stmt):
            if b.is_star:
                continue
            module = b.module
            if b.level and unit_path is not None:
                module = resolve_import_module(unit_path, b.module, b.level) or b.module
            if b.binds_module:
                if b.has_alias:
                    out[b.local] = module or b.local
                else:
                    out[b.local] = b.local  # "import a.b" binds "a" meaning "a"
            else:
                prefix = module or ""
                out[b.local] = f"{prefix}.{b.orig}" if prefix else (b.orig or b.local)
    return out


def dotted_name(expr: ast.expr) -> str | None:
    """Source-order dotted form of a Name/Attribute chain, None otherwise."""
    parts: list[str] = []
    node = expr
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return ".".join(reversed(parts))
    return None


def dealias(dotted: str, aliases: dict[str, str]) -> str:
    """Rewrite the root of a dotted name through the file's import aliases."""
    root, _, rest = dotted.partition(".")
    expansion = aliases.get(root)
    if expansion is None:
        return dotted
    return f"{expansion}.{rest}" if rest else expansion
