"""Scope-sensitive name resolution and minimal dependency closures.

Given a target block, the closure walk starts at its defining statement and
chases every free name: same-module names resolve to their binding
statements, names imported from in-index modules are followed into those
modules and inlined, and everything else is satisfied by carrying the
original import statement verbatim.  Load-time references (base classes,
decorators, defaults, class bodies, top-level expressions) later constrain
ordering; references that only run inside function bodies are recorded as
deferred and never do.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

from . import imports as imp
from .scanner import BlockCandidate, CorpusIndex
from .scopes import BUILTIN_NAMES, ScopeTable, Scope, bound_names, build_scopes
from .syntax import SyntaxTree

NodeId = tuple[str, int]  # (unit path, top-level chunk position)


class TargetNotFound(Exception):
    pass


class AmbiguousTarget(Exception):
    def __init__(self, name: str, matches):
        self.matches = list(matches)
        where = ", ".join(f"{c.unit_path}::{c.name}" for c in self.matches)
        super().__init__(f"'{name}' matches more than one candidate ({where}); use a path-qualified name")


@dataclass(frozen=True)
class Binding:
    name: str
    scope_kind: str  # local | enclosing | global | builtin | unresolved
    site_kind: str | None = None  # definition | import | parameter | assignment
    sites: tuple = ()


def resolve_name(name: str, scope: Scope, table: ScopeTable) -> Binding:
    """LEGB lookup from ``scope``; absence comes back as a value, never a guess."""
    start = scope
    if name in scope.global_names:
        chain = [table.module_scope]
    elif name in scope.nonlocal_names:
        chain, s = [], scope.parent
        while s is not None:
            if s.is_function_like():
                chain.append(s)
            s = s.parent
    else:
        chain, s = [], scope
        while s is not None:
            # class scopes are invisible except as the starting scope
            if s is start or s.kind != "class":
                chain.append(s)
            s = s.parent
    for s in chain:
        sites = s.bindings.get(name)
        if sites:
            if s is start:
                kind = "global" if s.kind == "module" else "local"
            elif s.kind == "module":
                kind = "global"
            else:
                kind = "enclosing"
            return Binding(name, kind, sites[0].site_kind, tuple(sites))
    if name in BUILTIN_NAMES:
        return Binding(name, "builtin")
    return Binding(name, "unresolved")


@dataclass(frozen=True)
class DefNode:
    """One top-level statement of one unit, with the names it binds."""

    unit_path: str
    index: int
    kind: str
    primary_name: str
    names: tuple[str, ...]
    span: tuple[int, int]
    is_import: bool

    @property
    def node_id(self) -> NodeId:
        return (self.unit_path, self.index)

    def label(self) -> str:
        return f"{self.unit_path}::{self.primary_name}"


@dataclass
class DependencyGraph:
    nodes: dict[NodeId, DefNode] = field(default_factory=dict)
    edges: set[tuple[NodeId, NodeId]] = field(default_factory=set)
    deferred_edges: set[tuple[NodeId, NodeId]] = field(default_factory=set)

    def add_edge(self, src: NodeId, dst: NodeId, deferred: bool) -> None:
        if src == dst:
            return
        if deferred:
            self.deferred_edges.add((src, dst))
        else:
            self.edges.add((src, dst))

    def successors(self, node: NodeId, deferred: bool = True):
        pool = self.edges | self.deferred_edges if deferred else self.edges
        return sorted(dst for src, dst in pool if src == node)


@dataclass(frozen=True)
class _Use:
    name: str
    deferred: bool
    node: ast.Name


class _UseCollector:
    """Classify every name use under one top-level statement as load-time or deferred."""

    def __init__(self, table: ScopeTable):
        self.table = table
        self.uses: list[_Use] = []

    def collect(self, stmt: ast.stmt) -> list[_Use]:
        self._stmt(stmt, deferred=False)
        return self.uses

    def _stmt(self, stmt: ast.stmt, deferred: bool) -> None:
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            for dec in stmt.decorator_list:
                self._expr(dec, deferred)
            args = stmt.args
            for default in list(args.defaults) + [d for d in args.kw_defaults if d is not None]:
                self._expr(default, deferred)
            for a in list(args.posonlyargs) + list(args.args) + list(args.kwonlyargs) + \
                    ([args.vararg] if args.vararg else []) + ([args.kwarg] if args.kwarg else []):
                if a.annotation is not None:
                    self._expr(a.annotation, True)
            if stmt.returns is not None:
                self._expr(stmt.returns, True)
            for sub in stmt.body:
                self._stmt(sub, True)
        elif isinstance(stmt, ast.ClassDef):
            for dec in stmt.decorator_list:
                self._expr(dec, deferred)
            for base in stmt.bases:
                self._expr(base, deferred)
            for kw in stmt.keywords:
                self._expr(kw.value, deferred)
            for sub in stmt.body:
                self._stmt(sub, deferred)  # class bodies run at definition time
        elif isinstance(stmt, ast.AnnAssign):
            self._expr(stmt.annotation, True)
            if stmt.value is not None:
                self._expr(stmt.value, deferred)
            if not isinstance(stmt.target, ast.Name):
                self._expr(stmt.target, deferred)
        elif isinstance(stmt, ast.AugAssign):
            self._expr(stmt.value, deferred)
            if isinstance(stmt.target, ast.Name):
                self.uses.append(_Use(stmt.target.id, deferred, stmt.target))
            else:
                self._expr(stmt.target, deferred)
        else:
            for sub in ast.iter_child_nodes(stmt):
                if isinstance(sub, ast.stmt):
                    self._stmt(sub, deferred)
                elif isinstance(sub, ast.expr):
                    self._expr(sub, deferred)
                elif isinstance(sub, ast.excepthandler):
                    if sub.type is not None:
                        self._expr(sub.type, deferred)
                    for s in sub.body:
                        self._stmt(s, deferred)
                elif isinstance(sub, ast.withitem):
                    self._expr(sub.context_expr, deferred)
                    if sub.optional_vars is not None:
                        self._expr(sub.optional_vars, deferred)
                elif isinstance(sub, ast.match_case):
                    if sub.guard is not None:
                        self._expr(sub.guard, deferred)
                    for s in sub.body:
                        self._stmt(s, deferred)

    def _expr(self, expr: ast.expr, deferred: bool) -> None:
        if isinstance(expr, ast.Name):
            if isinstance(expr.ctx, (ast.Load, ast.Del)):
                self.uses.append(_Use(expr.id, deferred, expr))
        elif isinstance(expr, ast.Lambda):
            for default in list(expr.args.defaults) + [d for d in expr.args.kw_defaults if d is not None]:
                self._expr(default, deferred)
            self._expr(expr.body, True)
        else:
            for sub in ast.iter_child_nodes(expr):
                if isinstance(sub, ast.expr):
                    self._expr(sub, deferred)
                elif isinstance(sub, ast.keyword):
                    self._expr(sub.value, deferred)
                elif isinstance(sub, ast.comprehension):
                    self._expr(sub.iter, deferred)
                    self._expr(sub.target, deferred)
                    for cond in sub.ifs:
                        self._expr(cond, deferred)


@dataclass
class UnitAnalysis:
    unit_path: str
    tree: SyntaxTree
    table: ScopeTable
    nodes: list[DefNode]
    # name -> node indexes that bind it, in source order
    binders: dict[str, list[int]]
    # per node: resolved module-level dependencies and leftovers
    module_deps: dict[int, list[tuple[str, int, bool]]]  # (name, binder index, deferred)
    unknown: dict[int, list[tuple[str, bool]]]  # unresolved at unit level
    star_imports: list[int]  # node indexes of star-import statements
    all_names: tuple[str, ...] | None  # literal __all__, when statically visible


def analyze_unit(tree: SyntaxTree) -> UnitAnalysis:
    table = build_scopes(tree)
    path = tree.unit.path

    nodes: list[DefNode] = []
    binders: dict[str, list[int]] = {}
    owner_to_index: dict[int, int] = {}
    star_imports: list[int] = []
    all_names = None

    for i, chunk in enumerate(tree.top_level):
        names: set[str] = set()
        for stmt in chunk.stmts:
            names |= bound_names(stmt)
            owner_to_index[id(stmt)] = i
        names.discard("*")
        is_import = all(isinstance(s, (ast.Import, ast.ImportFrom)) for s in chunk.stmts)
        if any(
            isinstance(s, ast.ImportFrom) and any(a.name == "*" for a in s.names)
            for s in chunk.stmts
        ):
            star_imports.append(i)
        primary = ""
        for stmt in chunk.stmts:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                primary = stmt.name
                break
        if not primary:
            primary = sorted(names)[0] if names else chunk.kind
        node = DefNode(
            unit_path=path,
            index=i,
            kind=chunk.kind,
            primary_name=primary,
            names=tuple(sorted(names)),
            span=chunk.span,
            is_import=is_import,
        )
        nodes.append(node)
        for name in names:
            binders.setdefault(name, []).append(i)
        # literal __all__ lists steer star-import publicity
        for stmt in chunk.stmts:
            if (
                isinstance(stmt, ast.Assign)
                and any(isinstance(t, ast.Name) and t.id == "__all__" for t in stmt.targets)
                and isinstance(stmt.value, (ast.List, ast.Tuple))
                and all(isinstance(e, ast.Constant) and isinstance(e.value, str) for e in stmt.value.elts)
            ):
                all_names = tuple(e.value for e in stmt.value.elts)

    module_deps: dict[int, list[tuple[str, int, bool]]] = {}
    unknown: dict[int, list[tuple[str, bool]]] = {}
    for i, chunk in enumerate(tree.top_level):
        deps: list[tuple[str, int, bool]] = []
        missing: list[tuple[str, bool]] = []
        seen: set[tuple[str, bool]] = set()
        for stmt in chunk.stmts:
            for use in _UseCollector(table).collect(stmt):
                key = (use.name, use.deferred)
                if key in seen:
                    continue
                seen.add(key)
                scope = table.scope_of(use.node) if id(use.node) in table._scope_of else table.module_scope
                binding = resolve_name(use.name, scope, table)
                if binding.scope_kind in ("local", "enclosing") and scope is not table.module_scope:
                    continue
                if binding.scope_kind == "builtin":
                    continue
                if binding.scope_kind == "unresolved":
                    missing.append((use.name, use.deferred))
                    continue
                # module-level binding: pick the binder the use actually sees
                owners = binders.get(use.name, [])
                if not owners:
                    missing.append((use.name, use.deferred))
                    continue
                before = [j for j in owners if j < i]
                if use.deferred or not before:
                    j = owners[-1]
                else:
                    j = before[-1]
                if j != i:
                    deps.append((use.name, j, use.deferred))
        module_deps[i] = deps
        unknown[i] = missing

    return UnitAnalysis(
        unit_path=path,
        tree=tree,
        table=table,
        nodes=nodes,
        binders=binders,
        module_deps=module_deps,
        unknown=unknown,
        star_imports=star_imports,
        all_names=all_names,
    )


def analysis_for(index: CorpusIndex, path: str) -> UnitAnalysis:
    found = index.analysis_cache.get(path)
    if found is None:
        found = analyze_unit(index.tree(path))
        index.analysis_cache[path] = found
    return found


def build_dependency_graph(index: CorpusIndex, unit) -> DependencyGraph:
    """Per-unit load/deferred dependency graph over top-level statements."""
    path = unit if isinstance(unit, str) else unit.path
    ana = analysis_for(index, path)
    graph = DependencyGraph()
    for node in ana.nodes:
        graph.nodes[node.node_id] = node
    for i, deps in ana.module_deps.items():
        for _, j, deferred in deps:
            graph.add_edge((path, i), (path, j), deferred)
    return graph


@dataclass
class ClosureResult:
    target: BlockCandidate
    definitions: list[DefNode]
    imports: list[str]  # original statement texts, carried verbatim
    unresolved: list[str]
    external: list[str]
    graph: DependencyGraph
    warnings: list[str] = field(default_factory=list)

    def definition_labels(self) -> list[str]:
        return sorted(n.label() for n in self.definitions)


def find_target(index: CorpusIndex, name: str) -> BlockCandidate:
    """Locate a candidate by bare name, dotted qualname, or path::name."""
    if "::" in name:
        path, _, bare = name.partition("::")
        matches = [c for c in index.candidates if c.unit_path == path and c.name == bare]
    else:
        matches = [c for c in index.candidates if c.qualname == name]
        if not matches and "." not in name:
            matches = [c for c in index.candidates if c.name == name]
    if not matches:
        raise TargetNotFound(f"no candidate named '{name}' in the index")
    if len(matches) > 1:
        # several definitions of one name in one unit: the last one wins,
        # matching runtime rebinding semantics
        units = {c.unit_path for c in matches}
        if len(units) == 1:
            return matches[-1]
        raise AmbiguousTarget(name, matches)
    return matches[0]


def _import_stmt_for(ana: UnitAnalysis, node_index: int) -> list[ast.stmt]:
    return [
        s
        for s in ana.tree.top_level[node_index].stmts
        if isinstance(s, (ast.Import, ast.ImportFrom))
    ]


def _statement_text(ana: UnitAnalysis, node_index: int) -> str:
    chunk = ana.tree.top_level[node_index]
    return ana.tree.statement_bytes(chunk).decode("utf-8").rstrip("\r\n")


def _public_names(ana: UnitAnalysis) -> set[str]:
    if ana.all_names is not None:
        return set(ana.all_names)
    return {n for n in ana.binders if not n.startswith("_")}


class _Resolution:
    """Outcome of chasing one name to a value across modules."""

    __slots__ = ("kind", "ana", "node_index", "note")

    def __init__(self, kind: str, ana: UnitAnalysis | None = None, node_index: int = -1, note: str = ""):
        self.kind = kind  # definition | carry | carry_stars | missing
        self.ana = ana
        self.node_index = node_index
        self.note = note


def closure(index: CorpusIndex, target: BlockCandidate) -> ClosureResult:
    """Minimal definition set and carried imports making ``target`` self-contained."""
    target_ana = analysis_for(index, target.unit_path)

    included: set[NodeId] = set()
    carried_imports: dict[str, None] = {}  # ordered de-dup by statement text
    unresolved: set[str] = set()
    external: set[str] = set()
    warnings: list[str] = []
    graph = DependencyGraph()
    worklist: list[NodeId] = []

    def include(ana: UnitAnalysis, node_index: int) -> NodeId:
        node = ana.nodes[node_index]
        if node.node_id not in included:
            included.add(node.node_id)
            graph.nodes[node.node_id] = node
            worklist.append(node.node_id)
        return node.node_id

    def carry_statement(ana: UnitAnalysis, node_index: int) -> None:
        carried_imports.setdefault(_statement_text(ana, node_index))

    def resolve_import_binding(ana: UnitAnalysis, binder_idx: int, name: str, seen: set) -> _Resolution:
        binding = None
        for stmt in _import_stmt_for(ana, binder_idx):
            for b in imp.import_bindings(stmt):
                if b.local == name:
                    binding = b
        if binding is None:
            return _Resolution("carry", ana, binder_idx)
        module = imp.resolve_import_module(ana.unit_path, binding.module, binding.level)
        target_path = index.module_map.get(module) if module else None
        if target_path is None:
            note = ""
            if binding.level:
                note = f"{ana.unit_path}: relative import of '{name}' does not resolve in-index; carried verbatim"
            return _Resolution("carry", ana, binder_idx, note)
        if binding.binds_module:
            return _Resolution(
                "carry",
                ana,
                binder_idx,
                f"{ana.unit_path}: '{name}' binds in-index module '{module}' as an object; "
                "carried verbatim, emitted module is not fully self-contained",
            )
        if binding.has_alias:
            return _Resolution(
                "carry",
                ana,
                binder_idx,
                f"{ana.unit_path}: aliased import of '{binding.orig}' as '{name}' from in-index "
                f"'{module}'; carried verbatim instead of inlined",
            )
        other = analysis_for(index, target_path)
        if index.module_map.get(f"{module}.{binding.orig}") is not None and not other.binders.get(binding.orig):
            return _Resolution(
                "carry",
                ana,
                binder_idx,
                f"{ana.unit_path}: '{name}' names in-index submodule '{module}.{binding.orig}'; carried verbatim",
            )
        return resolve_in_module(other, binding.orig or name, seen)

    def resolve_in_module(ana: UnitAnalysis, name: str, seen: set) -> _Resolution:
        """Chase ``name`` to its final binder inside ``ana``, following re-exports."""
        key = (ana.unit_path, name)
        if key in seen:
            return _Resolution("missing")
        seen.add(key)
        owners = ana.binders.get(name, [])
        if owners:
            j = owners[-1]  # importers observe the module's final state
            if ana.nodes[j].is_import:
                return resolve_import_binding(ana, j, name, seen)
            return _Resolution("definition", ana, j)
        return resolve_by_star(ana, name, seen)

    def resolve_by_star(ana: UnitAnalysis, name: str, seen: set) -> _Resolution:
        for star_idx in ana.star_imports:
            for stmt in _import_stmt_for(ana, star_idx):
                for b in imp.import_bindings(stmt):
                    if not b.is_star:
                        continue
                    module = imp.resolve_import_module(ana.unit_path, b.module, b.level)
                    target_path = index.module_map.get(module) if module else None
                    if target_path is None:
                        continue
                    other = analysis_for(index, target_path)
                    if name in _public_names(other):
                        found = resolve_in_module(other, name, seen)
                        if found.kind != "missing":
                            return found
        has_external_star = False
        for star_idx in ana.star_imports:
            for stmt in _import_stmt_for(ana, star_idx):
                for b in imp.import_bindings(stmt):
                    if not b.is_star:
                        continue
                    module = imp.resolve_import_module(ana.unit_path, b.module, b.level)
                    if module is None or module not in index.module_map:
                        has_external_star = True
        if has_external_star:
            return _Resolution("carry_stars", ana)
        return _Resolution("missing")

    def apply(user: NodeId, name: str, deferred: bool, res: _Resolution) -> None:
        if res.note:
            warnings.append(res.note)
        if res.kind == "definition":
            dep_id = include(res.ana, res.node_index)
            graph.add_edge(user, dep_id, deferred)
        elif res.kind == "carry":
            carry_statement(res.ana, res.node_index)
            external.add(name)
        elif res.kind == "carry_stars":
            for star_idx in res.ana.star_imports:
                for stmt in _import_stmt_for(res.ana, star_idx):
                    for b in imp.import_bindings(stmt):
                        if b.is_star:
                            module = imp.resolve_import_module(res.ana.unit_path, b.module, b.level)
                            if module is None or module not in index.module_map:
                                carry_statement(res.ana, star_idx)
            external.add(name)
        else:
            unresolved.add(name)

    include(target_ana, target.stmt_index)

    processed: set[NodeId] = set()
    while worklist:
        node_id = worklist.pop()
        if node_id in processed:
            continue
        processed.add(node_id)
        path, i = node_id
        ana = analysis_for(index, path)
        for name, j, deferred in ana.module_deps[i]:
            dep = ana.nodes[j]
            if dep.is_import:
                apply(node_id, name, deferred, resolve_import_binding(ana, j, name, set()))
            else:
                dep_id = include(ana, j)
                graph.add_edge(node_id, dep_id, deferred)
        for name, deferred in ana.unknown[i]:
            apply(node_id, name, deferred, resolve_by_star(ana, name, set()))

    # future imports govern how the code they ship with is interpreted
    # (notably annotation evaluation), so contributing units propagate theirs
    for path in sorted({nid[0] for nid in included}):
        ana = analysis_for(index, path)
        for node in ana.nodes:
            if not node.is_import:
                continue
            for stmt in _import_stmt_for(ana, node.index):
                if isinstance(stmt, ast.ImportFrom) and stmt.module == "__future__":
                    carried_imports.setdefault(_statement_text(ana, node.index))

    # keep source order among same-unit rebinds of one name
    by_unit_name: dict[tuple[str, str], list[NodeId]] = {}
    for node_id in included:
        node = graph.nodes[node_id]
        for name in node.names:
            by_unit_name.setdefault((node.unit_path, name), []).append(node_id)
    for (_, _name), ids in by_unit_name.items():
        ids.sort(key=lambda nid: nid[1])
        for earlier, later in zip(ids, ids[1:]):
            graph.add_edge(later, earlier, deferred=False)

    definitions = sorted((graph.nodes[nid] for nid in included), key=lambda n: (n.unit_path, n.index))
    return ClosureResult(
        target=target,
        definitions=definitions,
        imports=sorted(carried_imports),
        unresolved=sorted(unresolved),
        external=sorted(external),
        graph=graph,
        warnings=warnings,
    )
