"""Topological ordering and emission of self-contained modules."""

from __future__ import annotations

import ast
import hashlib
import heapq
from dataclasses import dataclass, field

from .resolver import ClosureResult, DefNode, DependencyGraph, NodeId, analysis_for
from .scanner import CorpusIndex


class CycleError(Exception):
    def __init__(self, members: list[str]):
        self.members = members
        super().__init__("load-time dependency cycle: " + " -> ".join(members))


class NameCollision(Exception):
    def __init__(self, name: str, units: list[str]):
        self.name = name
        self.units = sorted(units)
        super().__init__(
            f"top-level name '{name}' is defined in more than one unit: {', '.join(self.units)}"
        )


class UnresolvedNamesError(Exception):
    def __init__(self, names: list[str]):
        self.names = sorted(names)
        super().__init__("closure has unresolved names: " + ", ".join(self.names))


@dataclass
class AssembledModule:
    target: str  # qualname
    source: str
    sha1: str
    import_header: list[str]
    provenance: list[dict]
    order: list[DefNode] = field(default_factory=list)

    def provenance_payload(self) -> dict:
        return {
            "target": self.target,
            "sha1": self.sha1,
            "imports": self.import_header,
            "statements": self.provenance,
        }


def topo_order(closure: ClosureResult, graph: DependencyGraph | None = None) -> list[DefNode]:
    """Dependency-first order over the closure's definitions.

    Only load-time edges constrain the order; deferred (body-only) references
    may legally form cycles.  Ties break on bare definition name so an
    assembled module reassembles in the same order it was emitted in.
    """
    graph = graph or closure.graph
    nodes = {n.node_id: n for n in closure.definitions}

    deps: dict[NodeId, set[NodeId]] = {nid: set() for nid in nodes}
    dependents: dict[NodeId, set[NodeId]] = {nid: set() for nid in nodes}
    for src, dst in graph.edges:
        if src in nodes and dst in nodes and src != dst:
            deps[src].add(dst)
            dependents[dst].add(src)

    def key(nid: NodeId):
        n = nodes[nid]
        return (n.primary_name, n.unit_path, n.index)

    ready = [key(nid) + (nid,) for nid, d in deps.items() if not d]
    heapq.heapify(ready)
    out: list[DefNode] = []
    emitted: set[NodeId] = set()
    while ready:
        *_, nid = heapq.heappop(ready)
        out.append(nodes[nid])
        emitted.add(nid)
        for user in dependents[nid]:
            deps[user].discard(nid)
            if not deps[user] and user not in emitted:
                heapq.heappush(ready, key(user) + (user,))
    if len(out) != len(nodes):
        remaining = {nid for nid in nodes if nid not in emitted}
        raise CycleError(_find_cycle(remaining, deps))
    return out


def _find_cycle(remaining: set[NodeId], deps: dict[NodeId, set[NodeId]]) -> list[str]:
    start = sorted(remaining)[0]
    trail: list[NodeId] = []
    seen: set[NodeId] = set()
    node = start
    while node not in seen:
        seen.add(node)
        trail.append(node)
        nxt = sorted(d for d in deps[node] if d in remaining)
        if not nxt:
            break
        node = nxt[0]
    if node in trail:
        trail = trail[trail.index(node):]
    return [f"{path}::{idx}" for path, idx in trail]


def _is_future_import(text: str) -> bool:
    try:
        stmt = ast.parse(text).body[0]
    except (SyntaxError, IndexError):
        return False
    return isinstance(stmt, ast.ImportFrom) and stmt.module == "__future__"


def canonical_import_header(imports: list[str]) -> list[str]:
    """Unique import texts; future imports first, the rest sorted by text."""
    unique = sorted(set(imports))
    future = [t for t in unique if _is_future_import(t)]
    rest = [t for t in unique if not _is_future_import(t)]
    return future + rest


def _strip_leading_blank_lines(trivia: str) -> str:
    lines = trivia.splitlines(keepends=True)
    k = 0
    while k < len(lines) and lines[k].strip() == "":
        k += 1
    return "".join(lines[k:])


def assemble(
    closure: ClosureResult,
    index: CorpusIndex,
    *,
    allow_unresolved: bool = False,
    preamble: bool = False,
    index_digest: str | None = None,
) -> AssembledModule:
    """Emit one self-contained module for the closure's target.

    Definitions appear verbatim (leading comments kept, leading blank lines
    normalized to the single separating blank line) after a canonical import
    header.  Refuses cross-unit top-level name collisions rather than rename.
    """
    if closure.unresolved and not allow_unresolved:
        raise UnresolvedNamesError(closure.unresolved)

    units_by_name: dict[str, set[str]] = {}
    for node in closure.definitions:
        for name in node.names:
            units_by_name.setdefault(name, set()).add(node.unit_path)
    for name, units in sorted(units_by_name.items()):
        if len(units) > 1:
            raise NameCollision(name, sorted(units))

    order = topo_order(closure)
    header = canonical_import_header(closure.imports)

    parts: list[str] = []
    provenance: list[dict] = []
    if preamble:
        line = f"# assembled module: target={closure.target.qualname}"
        if index_digest:
            line += f" index={index_digest}"
        parts.append(line + "\n")
    for text in header:
        parts.append(text if text.endswith("\n") else text + "\n")
        provenance.append({"kind": "import", "text": text})

    have_prefix = bool(parts)
    for k, node in enumerate(order):
        ana = analysis_for(index, node.unit_path)
        chunk_node = ana.tree.top_level[node.index]
        trivia = _strip_leading_blank_lines(ana.tree.trivia_bytes(chunk_node).decode("utf-8"))
        stmt = ana.tree.statement_bytes(chunk_node).decode("utf-8")
        if not stmt.endswith("\n"):
            stmt += "\n"
        if k > 0 or have_prefix:
            parts.append("\n")
        parts.append(trivia + stmt)
        provenance.append(
            {
                "kind": "definition",
                "name": node.primary_name,
                "names": list(node.names),
                "unit": node.unit_path,
                "span": list(node.span),
            }
        )

    source = "".join(parts)
    try:
        ast.parse(source)
    except SyntaxError as exc:  # pragma: no cover - guarded by construction
        raise AssertionError(f"assembled module does not parse: {exc}") from exc

    return AssembledModule(
        target=closure.target.qualname,
        source=source,
        sha1=hashlib.sha1(source.encode("utf-8")).hexdigest(),
        import_header=header,
        provenance=provenance,
        order=order,
    )
