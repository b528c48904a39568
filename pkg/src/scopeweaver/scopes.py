"""Scope trees and name-binding tables for parsed units.

Builds one scope per module / class / function / lambda / comprehension and
records every statically visible binding (definitions, imports, parameters,
assignments).  Lookup follows the language rule: local, then enclosing
function scopes, then module, then builtins -- class scopes never act as
enclosing scopes for the functions nested inside them.
"""

from __future__ import annotations

import ast
import itertools
from dataclasses import dataclass, field

from ._builtins import BUILTIN_NAMES, BUILTINS_VERSION

__all__ = [
    "BUILTIN_NAMES",
    "BUILTINS_VERSION",
    "BindingSite",
    "Scope",
    "ScopeError",
    "ScopeTable",
    "build_scopes",
    "bound_names",
]

SITE_DEFINITION = "definition"
SITE_IMPORT = "import"
SITE_PARAMETER = "parameter"
SITE_ASSIGNMENT = "assignment"

STAR_BINDING = "*"


class ScopeError(Exception):
    """A nonlocal declaration with no matching enclosing binding."""


@dataclass(frozen=True)
class BindingSite:
    name: str
    site_kind: str  # definition | import | parameter | assignment
    lineno: int
    col: int
    node_id: int  # id() of the owning ast statement, resolved via ScopeTable


@dataclass
class Scope:
    kind: str  # module | class | function | comprehension
    name: str
    parent: "Scope | None" = None
    children: list["Scope"] = field(default_factory=list)
    bindings: dict[str, list[BindingSite]] = field(default_factory=dict)
    global_names: set[str] = field(default_factory=set)
    nonlocal_names: set[str] = field(default_factory=set)
    star_imports: list[ast.ImportFrom] = field(default_factory=list)

    def bind(self, site: BindingSite) -> None:
        self.bindings.setdefault(site.name, []).append(site)

    def is_function_like(self) -> bool:
        return self.kind in ("function", "comprehension")


@dataclass
class ScopeTable:
    module_scope: Scope
    scopes: list[Scope]
    # scope owning each ast node (statements and expressions)
    _scope_of: dict[int, Scope] = field(default_factory=dict)

    def scope_of(self, node: ast.AST) -> Scope:
        return self._scope_of[id(node)]


def _target_names(target: ast.expr) -> list[ast.Name]:
    """Name nodes bound by an assignment target (tuples/lists/starred walked)."""
    if isinstance(target, ast.Name):
        return [target]
    if isinstance(target, (ast.Tuple, ast.List)):
        return list(itertools.chain.from_iterable(_target_names(e) for e in target.elts))
    if isinstance(target, ast.Starred):
        return _target_names(target.value)
    return []  # attribute / subscript targets bind nothing new


def bound_names(stmt: ast.stmt) -> set[str]:
    """Top-level names a statement binds when executed, branches included."""
    names: set[str] = set()

    def collect(s: ast.stmt) -> None:
        if isinstance(s, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            names.add(s.name)
        elif isinstance(s, ast.Assign):
            for t in s.targets:
                names.update(n.id for n in _target_names(t))
        elif isinstance(s, ast.AugAssign):
            names.update(n.id for n in _target_names(s.target))
        elif isinstance(s, ast.AnnAssign):
            if s.value is not None:
                names.update(n.id for n in _target_names(s.target))
        elif isinstance(s, (ast.For, ast.AsyncFor)):
            names.update(n.id for n in _target_names(s.target))
            for sub in s.body + s.orelse:
                collect(sub)
        elif isinstance(s, (ast.With, ast.AsyncWith)):
            for item in s.items:
                if item.optional_vars is not None:
                    names.update(n.id for n in _target_names(item.optional_vars))
            for sub in s.body:
                collect(sub)
        elif isinstance(s, ast.Import):
            for alias in s.names:
                names.add(alias.asname or alias.name.split(".")[0])
        elif isinstance(s, ast.ImportFrom):
            for alias in s.names:
                if alias.name == "*":
                    names.add(STAR_BINDING)
                else:
                    names.add(alias.asname or alias.name)
        elif isinstance(s, ast.If):
            for sub in s.body + s.orelse:
                collect(sub)
        elif isinstance(s, ast.Try):
            for sub in s.body + s.orelse + s.finalbody:
                collect(sub)
            for handler in s.handlers:
                for sub in handler.body:
                    collect(sub)
        elif isinstance(s, ast.Match):
            for case in s.cases:
                for sub in case.body:
                    collect(sub)
        elif isinstance(s, ast.Expr) and isinstance(s.value, ast.NamedExpr):
            names.update(n.id for n in _target_names(s.value.target))

    collect(stmt)
    # walrus targets anywhere in the statement's expressions bind in the
    # statement's own scope
    for node in ast.walk(stmt):
        if isinstance(node, ast.NamedExpr) and isinstance(node.target, ast.Name):
            names.add(node.target.id)
    return names


class _ScopeBuilder:
    def __init__(self, path: str):
        self.path = path
        self.module_scope = Scope(kind="module", name="<module>")
        self.scopes = [self.module_scope]
        self.scope_of: dict[int, Scope] = {}
        self._pending_nonlocal: list[tuple[Scope, BindingSite]] = []

    # -- helpers ---------------------------------------------------------

    def _new_scope(self, kind: str, name: str, parent: Scope) -> Scope:
        scope = Scope(kind=kind, name=name, parent=parent)
        parent.children.append(scope)
        self.scopes.append(scope)
        return scope

    def _binding_scope(self, scope: Scope, name: str) -> Scope | None:
        """Scope a plain assignment of ``name`` lands in, honoring global/nonlocal.

        Returns None for nonlocal names: their home scope may bind the name
        textually later, so they are resolved in a post-pass.
        """
        if name in scope.global_names:
            return self.module_scope
        if name in scope.nonlocal_names:
            return None
        return scope

    def _walrus_scope(self, scope: Scope) -> Scope:
        # assignment expressions skip comprehension scopes
        target = scope
        while target.kind == "comprehension":
            target = target.parent
        return target

    def _bind(self, scope: Scope, name: str, site_kind: str, node: ast.AST, owner: ast.AST) -> None:
        site = BindingSite(
            name=name,
            site_kind=site_kind,
            lineno=getattr(node, "lineno", 0),
            col=getattr(node, "col_offset", 0),
            node_id=id(owner),
        )
        home = self._binding_scope(scope, name)
        if home is None:
            self._pending_nonlocal.append((scope, site))
        else:
            home.bind(site)

    # -- statement walk --------------------------------------------------

    def build(self, module: ast.Module) -> ScopeTable:
        self.scope_of[id(module)] = self.module_scope
        self._walk_body(module.body, self.module_scope, owner=None)
        # nonlocal targets may be bound textually later in the enclosing
        # function, so they resolve only once the whole tree is walked
        for scope, site in self._pending_nonlocal:
            target = scope.parent
            while target is not None:
                if target.is_function_like() and site.name in target.bindings:
                    target.bind(site)
                    break
                target = target.parent
            else:
                raise ScopeError(f"{self.path}: no binding for nonlocal '{site.name}'")
        return ScopeTable(
            module_scope=self.module_scope,
            scopes=self.scopes,
            _scope_of=self.scope_of,
        )

    def _walk_body(self, body: list[ast.stmt], scope: Scope, owner: ast.AST | None) -> None:
        # pre-scan declarations: global/nonlocal apply to the whole scope
        for stmt in body:
            self._collect_declarations(stmt, scope)
        for stmt in body:
            self._visit_stmt(stmt, scope, owner or stmt)

    def _collect_declarations(self, stmt: ast.stmt, scope: Scope) -> None:
        # only direct children of this scope's body, not nested functions
        if isinstance(stmt, ast.Global):
            scope.global_names.update(stmt.names)
        elif isinstance(stmt, ast.Nonlocal):
            scope.nonlocal_names.update(stmt.names)
        elif isinstance(stmt, (ast.If, ast.Try, ast.For, ast.AsyncFor, ast.While, ast.With, ast.AsyncWith)):
            for sub in ast.iter_child_nodes(stmt):
                if isinstance(sub, ast.stmt):
                    self._collect_declarations(sub, scope)
                elif isinstance(sub, ast.excepthandler):
                    for s in sub.body:
                        self._collect_declarations(s, scope)

    def _visit_stmt(self, stmt: ast.stmt, scope: Scope, owner: ast.AST) -> None:
        self.scope_of[id(stmt)] = scope
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            self._bind(scope, stmt.name, SITE_DEFINITION, stmt, owner)
            self._visit_exprs(stmt.decorator_list, scope, owner)
            self._visit_exprs([d for d in stmt.args.defaults], scope, owner)
            self._visit_exprs([d for d in stmt.args.kw_defaults if d is not None], scope, owner)
            inner = self._new_scope("function", stmt.name, scope)
            self.scope_of[id(stmt.args)] = inner
            for arg in self._all_args(stmt.args):
                inner.bind(BindingSite(arg.arg, SITE_PARAMETER, arg.lineno, arg.col_offset, id(stmt)))
            self._visit_exprs([a.annotation for a in self._all_args(stmt.args) if a.annotation], scope, owner)
            if stmt.returns is not None:
                self._visit_exprs([stmt.returns], scope, owner)
            self._walk_body(stmt.body, inner, owner=None)
        elif isinstance(stmt, ast.ClassDef):
            self._bind(scope, stmt.name, SITE_DEFINITION, stmt, owner)
            self._visit_exprs(stmt.decorator_list, scope, owner)
            self._visit_exprs(stmt.bases, scope, owner)
            self._visit_exprs([k.value for k in stmt.keywords], scope, owner)
            inner = self._new_scope("class", stmt.name, scope)
            self._walk_body(stmt.body, inner, owner=None)
        elif isinstance(stmt, ast.Assign):
            self._visit_exprs([stmt.value], scope, owner)
            for t in stmt.targets:
                self._visit_exprs([t], scope, owner, store_ok=True)
                for n in _target_names(t):
                    self._bind(scope, n.id, SITE_ASSIGNMENT, n, owner)
        elif isinstance(stmt, ast.AugAssign):
            self._visit_exprs([stmt.value, stmt.target], scope, owner, store_ok=True)
            for n in _target_names(stmt.target):
                self._bind(scope, n.id, SITE_ASSIGNMENT, n, owner)
        elif isinstance(stmt, ast.AnnAssign):
            self._visit_exprs([stmt.annotation], scope, owner)
            if stmt.value is not None:
                self._visit_exprs([stmt.value], scope, owner)
                for n in _target_names(stmt.target):
                    self._bind(scope, n.id, SITE_ASSIGNMENT, n, owner)
        elif isinstance(stmt, (ast.Import, ast.ImportFrom)):
            if isinstance(stmt, ast.ImportFrom) and any(a.name == "*" for a in stmt.names):
                scope.star_imports.append(stmt)
            for name in bound_names(stmt) - {STAR_BINDING}:
                self._bind(scope, name, SITE_IMPORT, stmt, owner)
        elif isinstance(stmt, (ast.For, ast.AsyncFor)):
            self._visit_exprs([stmt.iter, stmt.target], scope, owner, store_ok=True)
            for n in _target_names(stmt.target):
                self._bind(scope, n.id, SITE_ASSIGNMENT, n, owner)
            self._walk_body(stmt.body, scope, owner)
            self._walk_body(stmt.orelse, scope, owner)
        elif isinstance(stmt, (ast.With, ast.AsyncWith)):
            for item in stmt.items:
                self._visit_exprs([item.context_expr], scope, owner)
                if item.optional_vars is not None:
                    self._visit_exprs([item.optional_vars], scope, owner, store_ok=True)
                    for n in _target_names(item.optional_vars):
                        self._bind(scope, n.id, SITE_ASSIGNMENT, n, owner)
            self._walk_body(stmt.body, scope, owner)
        elif isinstance(stmt, ast.Try):
            self._walk_body(stmt.body, scope, owner)
            for handler in stmt.handlers:
                self.scope_of[id(handler)] = scope
                if handler.type is not None:
                    self._visit_exprs([handler.type], scope, owner)
                if handler.name:
                    self._bind(scope, handler.name, SITE_ASSIGNMENT, handler, owner)
                self._walk_body(handler.body, scope, owner)
            self._walk_body(stmt.orelse, scope, owner)
            self._walk_body(stmt.finalbody, scope, owner)
        elif isinstance(stmt, ast.If):
            self._visit_exprs([stmt.test], scope, owner)
            self._walk_body(stmt.body, scope, owner)
            self._walk_body(stmt.orelse, scope, owner)
        elif isinstance(stmt, ast.While):
            self._visit_exprs([stmt.test], scope, owner)
            self._walk_body(stmt.body, scope, owner)
            self._walk_body(stmt.orelse, scope, owner)
        elif isinstance(stmt, ast.Match):
            self._visit_exprs([stmt.subject], scope, owner)
            for case in stmt.cases:
                self.scope_of[id(case)] = scope
                for name in _pattern_names(case.pattern):
                    self._bind(scope, name, SITE_ASSIGNMENT, case.pattern, owner)
                if case.guard is not None:
                    self._visit_exprs([case.guard], scope, owner)
                self._walk_body(case.body, scope, owner)
        elif isinstance(stmt, (ast.Global, ast.Nonlocal)):
            pass  # handled in the declaration pre-scan
        elif isinstance(stmt, ast.Expr):
            self._visit_exprs([stmt.value], scope, owner)
        elif isinstance(stmt, (ast.Return, ast.Raise, ast.Assert, ast.Delete)):
            for sub in ast.iter_child_nodes(stmt):
                if isinstance(sub, ast.expr):
                    self._visit_exprs([sub], scope, owner)
        else:
            for sub in ast.iter_child_nodes(stmt):
                if isinstance(sub, ast.expr):
                    self._visit_exprs([sub], scope, owner)

    def _all_args(self, args: ast.arguments) -> list[ast.arg]:
        out = list(args.posonlyargs) + list(args.args) + list(args.kwonlyargs)
        if args.vararg:
            out.append(args.vararg)
        if args.kwarg:
            out.append(args.kwarg)
        return out

    def _visit_exprs(self, exprs, scope: Scope, owner: ast.AST, store_ok: bool = False) -> None:
        for expr in exprs:
            if expr is None:
                continue
            self._visit_expr(expr, scope, owner)

    def _visit_expr(self, expr: ast.expr, scope: Scope, owner: ast.AST) -> None:
        self.scope_of[id(expr)] = scope
        if isinstance(expr, ast.Lambda):
            self._visit_exprs(expr.args.defaults, scope, owner)
            self._visit_exprs([d for d in expr.args.kw_defaults if d is not None], scope, owner)
            inner = self._new_scope("function", "<lambda>", scope)
            for arg in self._all_args(expr.args):
                inner.bind(BindingSite(arg.arg, SITE_PARAMETER, arg.lineno, arg.col_offset, id(owner)))
            self._visit_expr_in(expr.body, inner, owner)
        elif isinstance(expr, (ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)):
            inner = self._new_scope("comprehension", "<comp>", scope)
            first = True
            for gen in expr.generators:
                # the first iterable is evaluated in the enclosing scope
                self._visit_expr_in(gen.iter, scope if first else inner, owner)
                first = False
                for n in _target_names(gen.target):
                    inner.bind(BindingSite(n.id, SITE_ASSIGNMENT, n.lineno, n.col_offset, id(owner)))
                for cond in gen.ifs:
                    self._visit_expr_in(cond, inner, owner)
            if isinstance(expr, ast.DictComp):
                self._visit_expr_in(expr.key, inner, owner)
                self._visit_expr_in(expr.value, inner, owner)
            else:
                self._visit_expr_in(expr.elt, inner, owner)
        elif isinstance(expr, ast.NamedExpr):
            self._visit_expr(expr.value, scope, owner)
            target_scope = self._walrus_scope(scope)
            if isinstance(expr.target, ast.Name):
                self._bind(target_scope, expr.target.id, SITE_ASSIGNMENT, expr.target, owner)
        else:
            for sub in ast.iter_child_nodes(expr):
                if isinstance(sub, ast.expr):
                    self._visit_expr(sub, scope, owner)
                elif isinstance(sub, ast.keyword):
                    self._visit_expr(sub.value, scope, owner)
                elif isinstance(sub, ast.comprehension):
                    pass  # handled above
                elif isinstance(sub, (ast.arguments, ast.arg)):
                    pass

    def _visit_expr_in(self, expr: ast.expr, scope: Scope, owner: ast.AST) -> None:
        self._visit_expr(expr, scope, owner)


def _pattern_names(pat) -> set[str]:
    names: set[str] = set()
    for node in ast.walk(pat):
        if isinstance(node, ast.MatchAs) and node.name:
            names.add(node.name)
        elif isinstance(node, ast.MatchStar) and node.name:
            names.add(node.name)
        elif isinstance(node, ast.MatchMapping) and node.rest:
            names.add(node.rest)
    return names


def build_scopes(tree) -> ScopeTable:
    """Build the scope table for a parsed unit (SyntaxTree or ast.Module)."""
    module = tree if isinstance(tree, ast.Module) else tree.module
    path = getattr(getattr(tree, "unit", None), "path", "<module>")
    return _ScopeBuilder(path).build(module)
