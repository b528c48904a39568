"""Repository walking and neural-block candidate discovery."""

from __future__ import annotations

import ast
import json
import os
import re
from dataclasses import dataclass, field

from . import imports as imp
from .syntax import (
    CstNode,
    EncodingError,
    SourceSyntaxError,
    SourceUnit,
    SyntaxTree,
    parse_lossless,
)

DEFAULT_BASE_PATTERNS = ("nn.Module", "torch.nn.Module", "Module")

# First match wins; anything unmatched lands in utilities.
DEFAULT_CATEGORY_RULES = (
    ("Attention|Attn", "attention"),
    ("Conv", "convolutions"),
    ("Transformer|Bert|Swin|Encoder|Decoder|GPT", "transformer_blocks"),
    ("Pool", "pooling"),
    ("Norm", "normalization"),
    ("Loss", "losses"),
    ("Net$|ResNet|VGG|Inception|Efficient|Model$|Backbone", "architectures"),
)

CATEGORIES = (
    "attention",
    "convolutions",
    "transformer_blocks",
    "pooling",
    "normalization",
    "losses",
    "architectures",
    "utilities",
)

_ABSTRACT_BASES = {"abc.ABC", "ABC"}
_ABSTRACT_METAS = {"abc.ABCMeta", "ABCMeta"}


class ScanError(Exception):
    pass


@dataclass(frozen=True)
class ScanConfig:
    base_patterns: tuple[str, ...] = DEFAULT_BASE_PATTERNS
    category_rules: tuple[tuple[str, str], ...] = DEFAULT_CATEGORY_RULES
    extensions: tuple[str, ...] = (".py",)

    @classmethod
    def from_file(cls, path: str) -> "ScanConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            base_patterns=tuple(raw.get("base_patterns", DEFAULT_BASE_PATTERNS)),
            category_rules=tuple(
                (rule["pattern"], rule["category"]) for rule in raw.get("category_rules", [])
            )
            or DEFAULT_CATEGORY_RULES,
            extensions=tuple(raw.get("extensions", (".py",))),
        )


@dataclass
class BlockCandidate:
    qualname: str
    unit_path: str
    span: tuple[int, int]
    kind: str  # class | function
    name: str
    bases: tuple[str, ...]
    has_forward: bool
    is_abstract: bool
    eligible: bool
    category: str
    stmt_index: int  # position among the unit's top-level chunks


@dataclass
class ParseFailure:
    path: str
    error_class: str
    message: str


@dataclass
class CorpusIndex:
    units: dict[str, SourceUnit] = field(default_factory=dict)
    trees: dict[str, SyntaxTree] = field(default_factory=dict)
    candidates: list[BlockCandidate] = field(default_factory=list)
    import_edges: list[tuple[str, str, str | None]] = field(default_factory=list)
    parse_failures: list[ParseFailure] = field(default_factory=list)
    io_errors: list[tuple[str, str]] = field(default_factory=list)
    module_map: dict[str, str] = field(default_factory=dict)
    config: ScanConfig = field(default_factory=ScanConfig)
    analysis_cache: dict = field(default_factory=dict, repr=False)

    def blob_items(self):
        """Content-addressed payloads, keyed by sha1 of raw bytes."""
        return {u.sha1: u.data for u in self.units.values()}

    def tree(self, path: str) -> SyntaxTree:
        tree = self.trees.get(path)
        if tree is None:
            tree = parse_lossless(self.units[path])
            self.trees[path] = tree
        return tree

    def candidates_by_qualname(self, qualname: str) -> list[BlockCandidate]:
        return [c for c in self.candidates if c.qualname == qualname]


def classify_category(candidate: BlockCandidate, rules=DEFAULT_CATEGORY_RULES) -> str:
    for pattern, category in rules:
        if re.search(pattern, candidate.name):
            return category
    return "utilities"


def _expr_source(tree: SyntaxTree, node: ast.expr) -> str:
    starts = _line_offsets(tree.unit.data)
    a = starts[node.lineno - 1] + node.col_offset
    b = starts[node.end_lineno - 1] + node.end_col_offset
    return tree.unit.data[a:b].decode("utf-8")


def _line_offsets(data: bytes) -> list[int]:
    starts = [0]
    idx = data.find(b"\n")
    while idx != -1:
        starts.append(idx + 1)
        idx = data.find(b"\n", idx + 1)
    return starts


def _top_level_imports(tree: SyntaxTree) -> list[ast.stmt]:
    out = []
    for node in tree.top_level:
        for stmt in node.stmts:
            if isinstance(stmt, (ast.Import, ast.ImportFrom)):
                out.append(stmt)
    return out


def _is_abstract(cls: ast.ClassDef, aliases: dict[str, str]) -> bool:
    for base in cls.bases:
        dotted = imp.dotted_name(base)
        if dotted and imp.dealias(dotted, aliases) in _ABSTRACT_BASES:
            return True
    for kw in cls.keywords:
        if kw.arg == "metaclass":
            dotted = imp.dotted_name(kw.value)
            if dotted and imp.dealias(dotted, aliases) in _ABSTRACT_METAS:
                return True
    for stmt in cls.body:
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            for dec in stmt.decorator_list:
                dotted = imp.dotted_name(dec)
                if dotted and imp.dealias(dotted, aliases).split(".")[-1] in (
                    "abstractmethod",
                    "abstractproperty",
                ):
                    return True
    return False


def _has_forward(cls: ast.ClassDef) -> bool:
    return any(
        isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)) and stmt.name == "forward"
        for stmt in cls.body
    )


def _base_matches(base_text: str, dealiased: str | None, patterns) -> bool:
    if base_text in patterns:
        return True
    return dealiased is not None and dealiased in patterns


def _walk_files(roots: list[str], extensions):
    prefix_roots = len(roots) > 1
    for root in roots:
        root = os.path.abspath(root)
        if not os.path.isdir(root):
            raise ScanError(f"scan root does not exist: {root}")
        base = os.path.basename(root.rstrip("/"))
        for dirpath, dirnames, filenames in os.walk(root):
            dirnames.sort()
            for fname in sorted(filenames):
                if not any(fname.endswith(ext) for ext in extensions):
                    continue
                full = os.path.join(dirpath, fname)
                rel = os.path.relpath(full, root).replace(os.sep, "/")
                if prefix_roots:
                    rel = f"{base}/{rel}"
                yield rel, full


def scan(roots: list[str], config: ScanConfig | None = None) -> CorpusIndex:
    """Build a content-addressed index of eligible block candidates.

    The result is a pure function of the file set: traversal order, root
    order, and unreadable files (recorded, then skipped) do not change it.
    """
    config = config or ScanConfig()
    index = CorpusIndex(config=config)

    for rel, full in _walk_files(list(roots), config.extensions):
        try:
            with open(full, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            index.io_errors.append((rel, str(exc)))
            continue
        if rel in index.units:
            raise ScanError(f"duplicate unit path across roots: {rel}")
        unit = SourceUnit.from_bytes(rel, data)
        index.units[rel] = unit
        try:
            tree = parse_lossless(unit)
        except EncodingError as exc:
            index.parse_failures.append(ParseFailure(rel, "EncodingError", str(exc)))
            continue
        except SourceSyntaxError as exc:
            index.parse_failures.append(ParseFailure(rel, "SyntaxError", exc.message))
            continue
        index.trees[rel] = tree
        index.module_map[imp.unit_module_path(rel)] = rel

    # discovery pass: candidates and import edges
    raw: list[tuple[BlockCandidate, tuple[str | None, ...]]] = []
    for rel in sorted(index.trees):
        tree = index.trees[rel]
        module_path = imp.unit_module_path(rel)
        aliases = imp.alias_map(_top_level_imports(tree), rel)
        for stmt in _top_level_imports(tree):
            for b in imp.import_bindings(stmt):
                resolved_module = imp.resolve_import_module(rel, b.module, b.level)
                target = index.module_map.get(resolved_module) if resolved_module else None
                index.import_edges.append((rel, resolved_module or (b.module or "."), target))
        for i, node in enumerate(tree.top_level):
            for stmt in node.stmts:
                if isinstance(stmt, ast.ClassDef):
                    bases = tuple(_expr_source(tree, b) for b in stmt.bases)
                    dealiased = tuple(
                        imp.dealias(d, aliases) if (d := imp.dotted_name(b)) else None
                        for b in stmt.bases
                    )
                    cand = BlockCandidate(
                        qualname=f"{module_path}.{stmt.name}" if module_path else stmt.name,
                        unit_path=rel,
                        span=node.span,
                        kind="class",
                        name=stmt.name,
                        bases=bases,
                        has_forward=_has_forward(stmt),
                        is_abstract=_is_abstract(stmt, aliases),
                        eligible=False,
                        category="utilities",
                        stmt_index=i,
                    )
                    raw.append((cand, dealiased))
                elif isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    cand = BlockCandidate(
                        qualname=f"{module_path}.{stmt.name}" if module_path else stmt.name,
                        unit_path=rel,
                        span=node.span,
                        kind="function",
                        name=stmt.name,
                        bases=(),
                        has_forward=False,
                        is_abstract=False,
                        eligible=False,
                        category="utilities",
                        stmt_index=i,
                    )
                    raw.append((cand, ()))

    # base-class match, followed transitively through in-index classes
    by_qualname: dict[str, int] = {}
    by_bare: dict[str, list[int]] = {}
    for pos, (cand, _) in enumerate(raw):
        if cand.kind == "class":
            by_qualname[cand.qualname] = pos
            by_bare.setdefault(f"{cand.unit_path}::{cand.name}", []).append(pos)

    memo: dict[int, bool] = {}

    def is_module_subclass(pos: int, trail: frozenset[int]) -> bool:
        if pos in memo:
            return memo[pos]
        if pos in trail:
            return False
        cand, dealiased = raw[pos]
        result = False
        for base_text, base_dealiased in zip(cand.bases, dealiased):
            if _base_matches(base_text, base_dealiased, config.base_patterns):
                result = True
                break
            ref = base_dealiased or base_text
            target_pos = None
            local_key = f"{cand.unit_path}::{ref}"
            if "." not in ref and by_bare.get(local_key):
                target_pos = by_bare[local_key][-1]
            elif ref in by_qualname:
                target_pos = by_qualname[ref]
            if target_pos is not None and is_module_subclass(target_pos, trail | {pos}):
                result = True
                break
        memo[pos] = result
        return result

    for pos, (cand, _) in enumerate(raw):
        if cand.kind == "class":
            subclass = is_module_subclass(pos, frozenset())
            cand.eligible = subclass and cand.has_forward and not cand.is_abstract
        cand.category = classify_category(cand, config.category_rules)
        index.candidates.append(cand)

    index.candidates.sort(key=lambda c: (c.unit_path, c.span[0]))
    index.import_edges.sort()
    return index
