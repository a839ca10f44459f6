"""Structural fingerprints for tool source code.

Parses Python tool source into an AST and extracts, for every node whose
subtree is large enough, a canonical encoding of the subtree's shape:
node kinds plus child arities, with identifiers and literal values
replaced by fixed placeholder tokens. The multiset of these encodings is
the tool's structural fingerprint, insensitive to renaming and literal
changes but sensitive to control-flow and call structure.
"""
from __future__ import annotations

import ast
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import AmbiguousEntry, NoEntryFound

ID_TOKEN = "<id>"
LIT_TOKEN = "<lit>"

# Matches the decorator convention used by common agent-tool frameworks:
# @tool, @mcp.tool, @mcp.tool(...), @app.tool(...), etc.
DEFAULT_ENTRY_MARKER = r"(?:^|\.)tool$"


@dataclass(frozen=True)
class SubjectSource:
    """A single tool implementation under analysis."""

    tool_id: str
    source_text: str
    entry_name: str | None = None

    def __post_init__(self):
        if not self.source_text:
            raise ValueError("source_text must be non-empty")


@dataclass(frozen=True)
class SubtreeShape:
    """Canonical encoding of one abstracted AST subtree."""

    encoding: str
    node_count: int


@dataclass
class ShapeMultiset:
    """Multiset of subtree shapes with multiplicities."""

    counts: Counter = field(default_factory=Counter)

    def total(self) -> int:
        return sum(self.counts.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, ShapeMultiset) and self.counts == other.counts

    def __len__(self) -> int:
        return len(self.counts)

    def serialize(self) -> str:
        """Stable sorted text form: one "encoding<TAB>count" line per shape."""
        lines = sorted(f"{s.encoding}\t{n}" for s, n in self.counts.items())
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def deserialize(cls, text: str) -> "ShapeMultiset":
        counts: Counter = Counter()
        for line in text.splitlines():
            if not line.strip():
                continue
            encoding, count = line.rsplit("\t", 1)
            # node_count is recoverable from the encoding itself
            counts[SubtreeShape(encoding, encoding.count("("))] = int(count)
        return cls(counts)


@dataclass(frozen=True)
class FingerprintConfig:
    """Knobs for fingerprint extraction."""

    min_subtree_nodes: int = 3
    id_token: str = ID_TOKEN
    lit_token: str = LIT_TOKEN

    def __post_init__(self):
        if self.min_subtree_nodes < 1:
            raise ValueError("min_subtree_nodes must be >= 1")


@dataclass(frozen=True)
class EntryDescriptor:
    """The callable entry point of a tool."""

    name: str
    params: tuple[str, ...]
    # byte offset (start, end) into source_text for each top-level body statement
    body_spans: tuple[tuple[int, int], ...]


def _is_docstring_stmt(stmt: ast.stmt) -> bool:
    return (
        isinstance(stmt, ast.Expr)
        and isinstance(stmt.value, ast.Constant)
        and isinstance(stmt.value.value, str)
    )


def _iter_children(node: ast.AST, skip_docstrings: bool):
    for name in node._fields:
        value = getattr(node, name, None)
        if isinstance(value, list):
            for i, item in enumerate(value):
                if not isinstance(item, ast.AST):
                    continue
                if (
                    skip_docstrings
                    and name == "body"
                    and i == 0
                    and isinstance(node, (ast.Module, ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef))
                    and _is_docstring_stmt(item)
                ):
                    continue
                yield item
        elif isinstance(value, ast.AST):
            yield value


def _encode(node: ast.AST, config: FingerprintConfig, out: list[tuple[str, int]]) -> tuple[str, int]:
    """Preorder encoding of a subtree; returns (encoding, node_count) and
    appends every visited subtree's pair to ``out``."""
    if isinstance(node, ast.Constant):
        enc = f"Constant({config.lit_token})"
        out.append((enc, 1))
        return enc, 1
    if isinstance(node, ast.Name):
        enc = f"Name({config.id_token})"
        out.append((enc, 1))
        return enc, 1

    parts = []
    count = 1
    for child in _iter_children(node, skip_docstrings=True):
        enc, n = _encode(child, config, out)
        parts.append(enc)
        count += n
    enc = f"{type(node).__name__}[{len(parts)}]({','.join(parts)})"
    out.append((enc, count))
    return enc, count


def fingerprint(source: SubjectSource, config: FingerprintConfig | None = None) -> ShapeMultiset:
    """Extract the multiset of abstracted subtree shapes from a tool.

    Raises SyntaxError when the source does not parse. A trivial source may
    legitimately yield an empty multiset.
    """
    config = config or FingerprintConfig()
    tree = ast.parse(source.source_text)
    pairs: list[tuple[str, int]] = []
    _encode(tree, config, pairs)
    counts: Counter = Counter()
    for enc, n in pairs:
        if n >= config.min_subtree_nodes:
            counts[SubtreeShape(enc, n)] += 1
    return ShapeMultiset(counts)


def _decorator_matches(dec: ast.expr, pattern: re.Pattern) -> bool:
    target = dec.func if isinstance(dec, ast.Call) else dec
    dotted = _dotted_name(target)
    return dotted is not None and pattern.search(dotted) is not None


def _dotted_name(node: ast.expr) -> str | None:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        base = _dotted_name(node.value)
        return f"{base}.{node.attr}" if base else node.attr
    return None


def _line_byte_offsets(source_text: str) -> list[int]:
    offsets = [0]
    for line in source_text.splitlines(keepends=True):
        offsets.append(offsets[-1] + len(line.encode("utf-8")))
    return offsets


def _stmt_span(stmt: ast.stmt, line_offsets: list[int], source_text: str) -> tuple[int, int]:
    lines = source_text.splitlines(keepends=True)
    start = line_offsets[stmt.lineno - 1] + len(lines[stmt.lineno - 1][: stmt.col_offset].encode("utf-8"))
    end = line_offsets[stmt.end_lineno - 1] + len(lines[stmt.end_lineno - 1][: stmt.end_col_offset].encode("utf-8"))
    return start, end


def locate_entry(source: SubjectSource, marker: str = DEFAULT_ENTRY_MARKER) -> EntryDescriptor:
    """Find the tool's entry function.

    When the source names an entry (entry_name), that function wins.
    Otherwise the first function carrying a decorator matching ``marker``
    is chosen; multiple marked functions raise AmbiguousEntry.
    """
    tree = ast.parse(source.source_text)
    funcs = [n for n in ast.walk(tree) if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))]

    if source.entry_name is not None:
        named = [f for f in funcs if f.name == source.entry_name]
        if not named:
            raise NoEntryFound(f"no function named {source.entry_name!r}")
        chosen = named[0]
    else:
        pattern = re.compile(marker)
        marked = [f for f in funcs if any(_decorator_matches(d, pattern) for d in f.decorator_list)]
        if not marked:
            raise NoEntryFound("no function carries the entry marker")
        if len(marked) > 1:
            raise AmbiguousEntry(f"{len(marked)} marked functions; set entry_name to choose one")
        chosen = marked[0]

    line_offsets = _line_byte_offsets(source.source_text)
    spans = tuple(_stmt_span(s, line_offsets, source.source_text) for s in chosen.body)
    params = tuple(a.arg for a in chosen.args.args)
    return EntryDescriptor(name=chosen.name, params=params, body_spans=spans)
