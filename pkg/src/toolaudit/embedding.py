"""Must-execute region analysis and payload embedding.

Given a tool entry function, finds the maximal prefix of body statements
that runs unconditionally on every invocation (no branching, looping,
exception scaffolding, or early exit), then splices a payload in at a
seeded-random point inside that prefix. Used to construct Trojan-style
evaluation tools whose (harmless, sandbox-targeted) payload is
guaranteed to execute whenever the tool is called.
"""
from __future__ import annotations

import ast
import random
from dataclasses import dataclass
from enum import Enum

from .errors import BindingError
from .fingerprint import EntryDescriptor, SubjectSource

ARGS_PLACEHOLDER = "__TOOL_ARGS__"

# Any of these at top level of a body ends the must-execute prefix:
# branches and loops diverge, try/with change effect ordering, and
# return/raise terminate early.
_DIVERGENT_STMTS = (
    ast.If,
    ast.For,
    ast.AsyncFor,
    ast.While,
    ast.With,
    ast.AsyncWith,
    ast.Try,
    ast.Return,
    ast.Raise,
)
if hasattr(ast, "Match"):
    _DIVERGENT_STMTS = _DIVERGENT_STMTS + (ast.Match,)
if hasattr(ast, "TryStar"):
    _DIVERGENT_STMTS = _DIVERGENT_STMTS + (ast.TryStar,)


@dataclass(frozen=True)
class StatementLocus:
    """One top-level statement inside an entry-function body."""

    function_name: str
    statement_index: int
    source_span: tuple[int, int]


@dataclass(frozen=True)
class MustExecuteRegion:
    """Contiguous always-executed prefix of an entry body (possibly empty)."""

    loci: tuple[StatementLocus, ...]

    def __len__(self) -> int:
        return len(self.loci)


class FunctionStart(Enum):
    """Sentinel: insert at the very top of the function body."""

    SENTINEL = 0


class Binding(Enum):
    REUSE_TOOL_INPUTS = "reuse"
    PREDEFINED_CONSTANTS = "constants"


@dataclass(frozen=True)
class PayloadSpec:
    """A payload to embed: statement sequence plus input-binding mode.

    Under REUSE_TOOL_INPUTS the token __TOOL_ARGS__ inside payload_source
    is replaced with the entry's lone parameter (or a list expression of
    all parameters when there are several); under PREDEFINED_CONSTANTS
    the payload runs on its fixed constants as-is.
    """

    behavior: str
    payload_source: str
    binding: Binding = Binding.PREDEFINED_CONSTANTS
    constants: dict | None = None

    def __post_init__(self):
        ast.parse(self.payload_source)  # must be a valid statement sequence


def _find_entry_node(tree: ast.Module, name: str) -> ast.FunctionDef | ast.AsyncFunctionDef:
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)) and node.name == name:
            return node
    raise ValueError(f"entry function {name!r} not found")


def must_execute_region(source: SubjectSource, entry: EntryDescriptor) -> MustExecuteRegion:
    """The maximal prefix of the entry body free of control-flow divergence.

    A leading docstring counts as an unconditional statement and is a
    valid insertion anchor.
    """
    tree = ast.parse(source.source_text)
    func = _find_entry_node(tree, entry.name)
    loci = []
    for i, stmt in enumerate(func.body):
        if isinstance(stmt, _DIVERGENT_STMTS):
            break
        loci.append(StatementLocus(entry.name, i, entry.body_spans[i]))
    return MustExecuteRegion(tuple(loci))


def choose_insertion_point(
    region: MustExecuteRegion, seed: int
) -> StatementLocus | FunctionStart:
    """Uniform seeded choice of an anchor statement; the payload goes
    immediately after it. An empty region maps to FunctionStart."""
    if not region.loci:
        return FunctionStart.SENTINEL
    return random.Random(seed).choice(region.loci)


def _bind_payload(spec: PayloadSpec, entry: EntryDescriptor) -> str:
    if spec.binding is Binding.REUSE_TOOL_INPUTS:
        if not entry.params:
            raise BindingError(f"entry {entry.name!r} has no parameters to reuse")
        # a lone parameter is forwarded as-is; multiple params as a list
        if len(entry.params) == 1:
            args_expr = entry.params[0]
        else:
            args_expr = "[" + ", ".join(entry.params) + "]"
        return spec.payload_source.replace(ARGS_PLACEHOLDER, args_expr)
    return spec.payload_source.replace(ARGS_PLACEHOLDER, "[]")


def embed_payload(benign: SubjectSource, entry: EntryDescriptor, spec: PayloadSpec, seed: int) -> SubjectSource:
    """Splice a payload into the benign tool's must-execute region.

    Original statements keep their order; the output re-parses and, when
    invoked, runs the payload before any branch of the benign body can
    diverge.
    """
    tree = ast.parse(benign.source_text)
    func = _find_entry_node(tree, entry.name)
    region = must_execute_region(benign, entry)
    anchor = choose_insertion_point(region, seed)

    lines = benign.source_text.splitlines(keepends=True)
    first_stmt = func.body[0]
    body_indent = " " * first_stmt.col_offset

    payload_stmts = ast.parse(_bind_payload(spec, entry)).body
    if first_stmt.lineno == func.lineno:
        # single-line def: textual splicing can't work, rebuild via AST
        pos = 0 if anchor is FunctionStart.SENTINEL else anchor.statement_index + 1
        func.body[pos:pos] = payload_stmts
        new_text = ast.unparse(ast.fix_missing_locations(tree)) + "\n"
        ast.parse(new_text)
        return SubjectSource(
            tool_id=f"{benign.tool_id}+{spec.behavior}",
            source_text=new_text,
            entry_name=entry.name,
        )

    if anchor is FunctionStart.SENTINEL:
        insert_line = first_stmt.lineno - 1  # 0-based: before first body statement
    else:
        insert_line = func.body[anchor.statement_index].end_lineno  # after the anchor

    payload_text = _bind_payload(spec, entry)
    payload_lines = [body_indent + pl + "\n" if pl.strip() else "\n" for pl in payload_text.splitlines()]

    new_lines = lines[:insert_line] + payload_lines + lines[insert_line:]
    new_text = "".join(new_lines)
    ast.parse(new_text)  # postcondition: the Trojan must still parse
    return SubjectSource(
        tool_id=f"{benign.tool_id}+{spec.behavior}",
        source_text=new_text,
        entry_name=entry.name,
    )
