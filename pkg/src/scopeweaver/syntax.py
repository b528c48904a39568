"""Lossless concrete-syntax layer for Python source files.

A parsed file is represented as an ordered list of top-level statement
chunks, each owning its leading trivia (comments and blank lines) plus the
verbatim statement bytes.  Re-emitting an unmodified tree reproduces the
original file byte for byte; reordering top-level chunks yields source that
still parses and keeps every comment with the statement it precedes.

Spans are byte offsets into the raw UTF-8 content.  Only UTF-8 input is
accepted; anything else is reported as unparseable with a distinct error.
"""

from __future__ import annotations

import ast
import hashlib
import io
import tokenize as _std_tokenize
from dataclasses import dataclass, field


class EncodingError(Exception):
    """Input is not plain UTF-8 (foreign coding cookie, BOM, or bad bytes)."""


class SourceSyntaxError(Exception):
    """Input does not parse under the supported grammar."""

    def __init__(self, path: str, line: int, column: int, message: str):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path = path
        self.line = line
        self.column = column
        self.message = message


class TokenizeError(Exception):
    """Input cannot be tokenized (bad indentation, unterminated string)."""


@dataclass(frozen=True)
class SourceUnit:
    """One source file: repo-relative path plus raw bytes and their digest."""

    path: str
    data: bytes
    sha1: str
    encoding: str = "utf-8"

    @classmethod
    def from_bytes(cls, path: str, data: bytes) -> "SourceUnit":
        return cls(path=path, data=data, sha1=hashlib.sha1(data).hexdigest())

    def text(self) -> str:
        try:
            return self.data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"{self.path}: not valid UTF-8: {exc}") from None


@dataclass
class CstNode:
    """A concrete-syntax chunk: leading trivia plus one top-level statement.

    ``span`` covers the statement proper (whole physical lines, decorators
    included); ``trivia_span`` covers the bytes between the previous chunk
    and this one.  ``stmts`` holds the underlying ast statements -- more than
    one only when statements share a physical line (semicolon groups), in
    which case they move as a single unit.
    """

    kind: str
    span: tuple[int, int]
    trivia_span: tuple[int, int]
    stmts: list[ast.stmt] = field(default_factory=list)
    children: list["CstNode"] = field(default_factory=list)

    @property
    def start(self) -> int:
        return self.span[0]

    @property
    def end(self) -> int:
        return self.span[1]


@dataclass
class SyntaxTree:
    """Lossless parse of one SourceUnit."""

    unit: SourceUnit
    top_level: list[CstNode]
    end_node: CstNode  # synthetic node owning file-trailing trivia
    module: ast.Module

    def nodes(self):
        """All chunk nodes, depth first, end node last."""
        out = []

        def walk(n: CstNode):
            out.append(n)
            for c in n.children:
                walk(c)

        for n in self.top_level:
            walk(n)
        out.append(self.end_node)
        return out

    def chunk_bytes(self, node: CstNode) -> bytes:
        """Verbatim bytes of a chunk: leading trivia plus statement."""
        return self.unit.data[node.trivia_span[0]:node.span[1]]

    def statement_bytes(self, node: CstNode) -> bytes:
        return self.unit.data[node.span[0]:node.span[1]]

    def trivia_bytes(self, node: CstNode) -> bytes:
        return self.unit.data[node.trivia_span[0]:node.trivia_span[1]]

    def reordered(self, order: list[CstNode]) -> "SyntaxTree":
        """Copy of this tree with top-level chunks permuted."""
        if sorted(id(n) for n in order) != sorted(id(n) for n in self.top_level):
            raise ValueError("order must be a permutation of top_level")
        return SyntaxTree(self.unit, list(order), self.end_node, self.module)


def _line_start_offsets(data: bytes) -> list[int]:
    # UTF-8 multibyte sequences never contain 0x0A, so splitting on raw
    # newlines is byte-exact.
    starts = [0]
    idx = data.find(b"\n")
    while idx != -1:
        starts.append(idx + 1)
        idx = data.find(b"\n", idx + 1)
    return starts


def _byte_offset(data: bytes, line_starts: list[int], lineno: int, col_offset: int) -> int:
    # ast col_offset counts UTF-8 bytes already.
    return line_starts[lineno - 1] + col_offset


def _check_encoding(unit: SourceUnit) -> None:
    if unit.data.startswith(b"\xef\xbb\xbf"):
        raise EncodingError(f"{unit.path}: UTF-8 BOM not supported")
    try:
        declared, _ = _std_tokenize.detect_encoding(io.BytesIO(unit.data).readline)
    except SyntaxError as exc:
        raise EncodingError(f"{unit.path}: {exc}") from None
    if declared.replace("_", "-").lower() not in ("utf-8", "ascii"):
        raise EncodingError(f"{unit.path}: declared encoding {declared!r} not supported")


def _stmt_first_line(stmt: ast.stmt) -> int:
    decorators = getattr(stmt, "decorator_list", None)
    if decorators:
        return min(stmt.lineno, decorators[0].lineno)
    return stmt.lineno


def _child_nodes(stmt: ast.stmt, data: bytes, line_starts: list[int]) -> list[CstNode]:
    children = []
    for attr in ("body", "orelse", "finalbody"):
        for sub in getattr(stmt, attr, []) or []:
            if not isinstance(sub, ast.stmt):
                continue
            start = _byte_offset(data, line_starts, _stmt_first_line(sub), 0 if getattr(sub, "decorator_list", None) else sub.col_offset)
            if getattr(sub, "decorator_list", None):
                dec = sub.decorator_list[0]
                start = _byte_offset(data, line_starts, dec.lineno, dec.col_offset)
            end = _byte_offset(data, line_starts, sub.end_lineno, sub.end_col_offset)
            children.append(
                CstNode(
                    kind=type(sub).__name__,
                    span=(start, end),
                    trivia_span=(start, start),
                    stmts=[sub],
                    children=_child_nodes(sub, data, line_starts),
                )
            )
    for handler in getattr(stmt, "handlers", []) or []:
        for sub in handler.body:
            start = _byte_offset(data, line_starts, sub.lineno, sub.col_offset)
            end = _byte_offset(data, line_starts, sub.end_lineno, sub.end_col_offset)
            children.append(
                CstNode(
                    kind=type(sub).__name__,
                    span=(start, end),
                    trivia_span=(start, start),
                    stmts=[sub],
                    children=_child_nodes(sub, data, line_starts),
                )
            )
    return children


def parse_lossless(unit: SourceUnit) -> SyntaxTree:
    """Parse a unit into reorderable top-level chunks.

    Raises EncodingError for non-UTF-8 input and SourceSyntaxError when the
    file does not parse; callers record such units as unparseable.
    """
    _check_encoding(unit)
    text = unit.text()
    try:
        module = ast.parse(text, filename=unit.path)
    except SyntaxError as exc:
        raise SourceSyntaxError(unit.path, exc.lineno or 0, exc.offset or 0, exc.msg or "invalid syntax") from None
    except ValueError as exc:  # e.g. null bytes
        raise SourceSyntaxError(unit.path, 0, 0, str(exc)) from None

    data = unit.data
    line_starts = _line_start_offsets(data)
    n_lines = len(line_starts)

    def line_end(lineno: int) -> int:
        return line_starts[lineno] if lineno < n_lines else len(data)

    # Group statements that share a physical line (semicolon groups) so a
    # chunk always covers whole lines.
    groups: list[list[ast.stmt]] = []
    for stmt in module.body:
        if groups and _stmt_first_line(stmt) <= groups[-1][-1].end_lineno:
            groups[-1].append(stmt)
        else:
            groups.append([stmt])

    top_level: list[CstNode] = []
    prev_end = 0
    for group in groups:
        first_line = _stmt_first_line(group[0])
        start = line_starts[first_line - 1]
        end = line_end(group[-1].end_lineno)
        kind = type(group[0]).__name__ if len(group) == 1 else "StatementGroup"
        children = []
        for stmt in group:
            children.extend(_child_nodes(stmt, data, line_starts))
        top_level.append(
            CstNode(
                kind=kind,
                span=(start, end),
                trivia_span=(prev_end, start),
                stmts=list(group),
                children=children,
            )
        )
        prev_end = end

    end_node = CstNode(
        kind="End",
        span=(len(data), len(data)),
        trivia_span=(prev_end, len(data)),
        stmts=[],
    )
    return SyntaxTree(unit=unit, top_level=top_level, end_node=end_node, module=module)


def emit(tree: SyntaxTree) -> bytes:
    """Re-emit a tree.

    Unmodified trees come back byte-identical.  After a top-level reorder the
    output is still valid source: a chunk that lost its end-of-file position
    gains the newline it was missing.
    """
    parts: list[bytes] = []
    chunks = tree.top_level
    for i, node in enumerate(chunks):
        chunk = tree.chunk_bytes(node)
        if i < len(chunks) - 1 and not chunk.endswith(b"\n"):
            chunk += b"\n"
        parts.append(chunk)
    parts.append(tree.trivia_bytes(tree.end_node))
    return b"".join(parts)


TOKEN_KINDS = ("NAME", "NUMBER", "STRING", "OP", "NEWLINE", "INDENT", "DEDENT", "COMMENT")

_STD_KIND = {
    _std_tokenize.NAME: "NAME",
    _std_tokenize.NUMBER: "NUMBER",
    _std_tokenize.STRING: "STRING",
    _std_tokenize.OP: "OP",
    _std_tokenize.NEWLINE: "NEWLINE",
    _std_tokenize.INDENT: "INDENT",
    _std_tokenize.DEDENT: "DEDENT",
    _std_tokenize.COMMENT: "COMMENT",
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    trivia: str  # verbatim source between the previous token and this one


@dataclass
class TokenStream:
    tokens: list[Token]
    trailing: str

    def reconstruct(self) -> str:
        return "".join(t.trivia + t.text for t in self.tokens) + self.trailing


def tokenize_unit(unit: SourceUnit) -> TokenStream:
    """Tokenize a unit, recording inter-token trivia for exact round-trip.

    Non-logical newlines (blank lines, newlines inside brackets) are trivia,
    not tokens; INDENT/DEDENT balance by construction of the tokenizer.
    """
    text = unit.text()
    char_line_starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            char_line_starts.append(i + 1)

    def abs_pos(row: int, col: int) -> int:
        if row - 1 >= len(char_line_starts):
            return len(text)
        return min(char_line_starts[row - 1] + col, len(text))

    tokens: list[Token] = []
    prev_end = 0
    try:
        for tok in _std_tokenize.generate_tokens(io.StringIO(text).readline):
            if tok.type == _std_tokenize.ENDMARKER:
                break
            if tok.type == _std_tokenize.ERRORTOKEN:
                raise TokenizeError(f"{unit.path}: bad token {tok.string!r} at line {tok.start[0]}")
            kind = _STD_KIND.get(tok.type)
            if kind is None:
                continue  # NL, ENCODING: absorbed into trivia
            start = abs_pos(*tok.start)
            end = abs_pos(*tok.end)
            tokens.append(
                Token(
                    kind=kind,
                    text=text[start:end],
                    line=tok.start[0],
                    column=tok.start[1],
                    trivia=text[prev_end:start],
                )
            )
            prev_end = end
    except (IndentationError, _std_tokenize.TokenError) as exc:
        raise TokenizeError(f"{unit.path}: {exc}") from None
    return TokenStream(tokens=tokens, trailing=text[prev_end:])
