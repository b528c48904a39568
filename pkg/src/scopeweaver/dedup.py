"""Whitespace-insensitive program fingerprinting and duplicate filtering.

The fingerprint hashes a token-level serialization: comments vanish,
indentation and logical line breaks survive only as structural markers, and
everything else (names, numbers, operators, string literals) is kept
verbatim.  Two sources that differ only in formatting or comments collide;
changing any real token changes the digest.

A purpose-built scanner keeps fingerprinting well under a millisecond for
typical module sizes; input the scanner cannot handle falls back to plain
line normalization so every input gets some digest.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass

try:
    import fcntl
except ImportError:  # non-POSIX: in-process locking only
    fcntl = None

_SEP = "\x1f"

# String literals, matched from the quote onward so the regex engine can skip
# by first character; a prefix like r/b/f stays behind as an adjacent NAME
# token, which is a consistent convention and costs nothing for matching.
_STRING_RE = re.compile(
    r"'''(?:\\[\s\S]|[^\\])*?'''"
    r"|\"\"\"(?:\\[\s\S]|[^\\])*?\"\"\""
    r"|'(?:\\[\s\S]|[^'\\\n])*'"
    r"|\"(?:\\[\s\S]|[^\"\\\n])*\""
)
_COMMENT_RE = re.compile(r"#[^\n]*")

# Tokens of string-free, comment-free code, ordered so common kinds resolve in
# few alternation attempts.  Whitespace is skipped; one whole-text scan for
# leftover characters catches anything the pattern cannot express.
# Operators tokenize one character at a time: multi-character operators
# split into adjacent OP tokens, which no whitespace-only edit of valid code
# can imitate, so collision behavior is unchanged and matching is one class.
_BODY_RE = re.compile(
    r"[A-Za-z_][A-Za-z0-9_]*"
    r"|[-+*/%@&|^~<>()\[\]{},:.;=!\x00]"
    r"|\d[0-9a-fA-FoOxXbB_]*(?:\.[\d_]*)?(?:[eE][+-]?\d[\d_]*)?[jJ]?"
)

_LINEJOIN_RE = re.compile(r"([()\[\]{}\n])")

# anything outside this alphabet (after extraction) cannot be scanned;
# non-ASCII identifiers take the line-normalization fallback
_UNSCANNABLE_RE = re.compile(r"[^A-Za-z0-9_ \t\f\n+\-*/%@&|^~<>()\[\]{},:.;=!\x00]")
_SENTINEL_RE = re.compile(r"[\x00-\x03]")

# placeholder characters for extracted strings and structural markers
_STR_MARK, _NL_MARK, _IN_MARK, _DE_MARK = "\x00", "\x01", "\x02", "\x03"

_CHARKIND = {}
for _c in "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_":
    _CHARKIND[_c] = "NAME"
for _c in "0123456789":
    _CHARKIND[_c] = "NUMBER"
for _c in "+-*/%@&|^~<>()[]{},:.;=!":
    _CHARKIND[_c] = "OP"
_CHARKIND[_STR_MARK] = "STRING"


class _TokenJoin(dict):
    """Memo of token text -> "KIND<sep>text", shared across calls."""

    def __missing__(self, tok):
        joined = _CHARKIND[tok[0]] + _SEP + tok
        if len(self) < 200_000:
            self[tok] = joined
        return joined


_TOKJOIN = _TokenJoin(
    {
        _NL_MARK: "NEWLINE",
        _IN_MARK: "INDENT",
        _DE_MARK: "DEDENT",
        _STR_MARK: "STRING" + _SEP + _STR_MARK,
    }
)


class _ScanFailure(Exception):
    pass


def _join_logical(text: str) -> str:
    """Replace newlines inside brackets with spaces, one bulk pass."""
    if "(" not in text and "[" not in text and "{" not in text:
        return text
    parts = _LINEJOIN_RE.split(text)
    depth = 0
    for i in range(1, len(parts), 2):
        ch = parts[i]
        if ch == "\n":
            if depth:
                parts[i] = " "
        elif ch in "([{":
            depth += 1
        elif depth:
            depth -= 1
    return "".join(parts)


def _scan_tokens(text: str) -> tuple[list[str], list[str]]:
    """Token texts (with placeholder marks) plus the extracted string literals."""
    if _SENTINEL_RE.search(text):
        raise _ScanFailure("control characters in source")
    strings: list[str] = []

    def grab(m: re.Match) -> str:
        strings.append(m.group())
        return _STR_MARK

    if "\r" in text:
        text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = _STRING_RE.sub(grab, text)
    text = _COMMENT_RE.sub(" ", text)
    if "\\" in text:
        text = text.replace("\\\n", " ")
    bad = _UNSCANNABLE_RE.search(text)
    if bad:
        raise _ScanFailure(f"unscannable character {bad.group()!r}")
    text = _join_logical(text)

    toks: list[str] = []
    append = toks.append
    extend = toks.extend
    findall = _BODY_RE.findall
    indents = [0]
    for line in text.split("\n"):
        body = line.lstrip(" \t\f")
        if not body:
            continue
        width = len(line) - len(body)
        if width and "\t" in line[:width]:
            width = _indent_width(line[:width])
        top = indents[-1]
        if width > top:
            indents.append(width)
            append(_IN_MARK)
        elif width < top:
            while width < indents[-1]:
                indents.pop()
                append(_DE_MARK)
            if width != indents[-1]:
                raise _ScanFailure("inconsistent dedent")
        line_tokens = findall(body)
        if line_tokens:
            extend(line_tokens)
            append(_NL_MARK)
    while len(indents) > 1:
        indents.pop()
        append(_DE_MARK)
    return toks, strings


def _serialize(toks: list[str], strings: list[str]) -> str:
    out = _SEP.join(map(_TOKJOIN.__getitem__, toks))
    if strings:
        pieces = out.split(_STR_MARK)
        filled = []
        for piece, literal in zip(pieces, strings):
            filled.append(piece)
            filled.append(literal)
        filled.append(pieces[-1])
        out = "".join(filled)
    return out


def _indent_width(ws: str) -> int:
    width = 0
    for ch in ws:
        if ch == "\t":
            width = (width // 8 + 1) * 8
        else:
            width += 1
    return width


def _line_normalize(text: str) -> bytes:
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    kept = [line.rstrip() for line in lines if line.strip()]
    return "\n".join(kept).encode("utf-8")


def normalize(source) -> bytes:
    """Token-level serialization of a module, formatting and comments erased."""
    if isinstance(source, bytes):
        try:
            text = source.decode("utf-8")
        except UnicodeDecodeError:
            text = source.decode("latin-1")
    else:
        text = source
    try:
        toks, strings = _scan_tokens(text)
        return _serialize(toks, strings).encode("utf-8")
    except (_ScanFailure, KeyError):
        return _line_normalize(text)


def fingerprint(source) -> str:
    """32-hex digest of the normalized token serialization."""
    return hashlib.md5(normalize(source)).hexdigest()


@dataclass
class DedupRecord:
    digest: str
    first_seen: dict  # {"module": ..., "at": iso timestamp}
    hit_count: int

    def to_line(self) -> str:
        return (
            json.dumps(
                {"digest": self.digest, "first_seen": self.first_seen, "hit_count": self.hit_count},
                sort_keys=True,
            )
            + "\n"
        )


class StoreError(Exception):
    pass


class DedupStore:
    """Append-only JSONL digest store with compaction on open.

    check_and_insert is atomic: under concurrent insertion of one digest,
    exactly one caller sees "new".  Cross-process callers are serialized with
    an advisory file lock where the platform provides one.
    """

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._records: dict[str, DedupRecord] = {}
        try:
            self._load()
            self._compact()
        except OSError as exc:
            raise StoreError(f"cannot open dedup store {path}: {exc}") from exc

    def _load(self) -> None:
        if not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    raw = json.loads(line)
                    self._records[raw["digest"]] = DedupRecord(
                        raw["digest"], raw["first_seen"], int(raw["hit_count"])
                    )
                except (ValueError, KeyError):
                    continue  # torn tail line from a crashed writer

    def _compact(self) -> None:
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            for digest in sorted(self._records):
                fh.write(self._records[digest].to_line())
        os.replace(tmp, self.path)

    def check_and_insert(self, digest: str, module_id: str = "", now: str | None = None):
        """Returns ("new", record) once per digest, then ("duplicate", record)."""
        with self._lock:
            try:
                fh = open(self.path, "a+", encoding="utf-8")
            except OSError as exc:
                raise StoreError(f"dedup store unwritable: {exc}") from exc
            try:
                if fcntl is not None:
                    fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
                # another process may have appended since our snapshot
                fh.seek(0)
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        raw = json.loads(line)
                        self._records[raw["digest"]] = DedupRecord(
                            raw["digest"], raw["first_seen"], int(raw["hit_count"])
                        )
                    except (ValueError, KeyError):
                        continue
                existing = self._records.get(digest)
                if existing is None:
                    record = DedupRecord(
                        digest,
                        {"module": module_id, "at": now or _utc_now()},
                        0,
                    )
                    self._records[digest] = record
                    fh.write(record.to_line())
                    fh.flush()
                    return "new", record
                existing.hit_count += 1
                fh.write(existing.to_line())
                fh.flush()
                return "duplicate", existing
            finally:
                if fcntl is not None:
                    fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
                fh.close()


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
