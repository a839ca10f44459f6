"""Fingerprint extraction against an independently written subtree oracle."""
import ast
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from toolaudit import (
    AmbiguousEntry,
    FingerprintConfig,
    NoEntryFound,
    ShapeMultiset,
    SubjectSource,
    SubtreeShape,
    fingerprint,
    locate_entry,
)

SAMPLES = [
    "x = 1\n",
    "def f(a, b):\n    return a + b\n",
    "def g(n):\n    total = 0\n    for i in range(n):\n        total += i\n    return total\n",
    "class C:\n    def m(self):\n        return [x * 2 for x in self.items]\n",
    "import os\n\nwith open('f') as fh:\n    data = fh.read()\nprint(data.strip())\n",
    "async def h():\n    await thing()\n",
    "try:\n    risky()\nexcept ValueError as e:\n    handle(e)\nfinally:\n    done()\n",
]


def oracle_shapes(source_text: str, min_nodes: int) -> Counter:
    """Brute-force oracle: enumerate every subtree bottom-up, building the
    encoding from child encodings, skipping docstring statements."""

    def children(node):
        owns_docstring = isinstance(
            node, (ast.Module, ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)
        )
        out = []
        for name in node._fields:
            value = getattr(node, name, None)
            items = value if isinstance(value, list) else [value]
            for i, item in enumerate(items):
                if not isinstance(item, ast.AST):
                    continue
                if (
                    owns_docstring
                    and name == "body"
                    and i == 0
                    and isinstance(item, ast.Expr)
                    and isinstance(item.value, ast.Constant)
                    and isinstance(item.value.value, str)
                ):
                    continue
                out.append(item)
        return out

    found: Counter = Counter()

    def visit(node):
        if isinstance(node, ast.Constant):
            enc, size = "Constant(<lit>)", 1
        elif isinstance(node, ast.Name):
            enc, size = "Name(<id>)", 1
        else:
            pairs = [visit(c) for c in children(node)]
            size = 1 + sum(s for _, s in pairs)
            enc = f"{type(node).__name__}[{len(pairs)}]({','.join(e for e, _ in pairs)})"
        if size >= min_nodes:
            found[enc] += 1
        return enc, size

    visit(ast.parse(source_text))
    return found


@pytest.mark.parametrize("source_text", SAMPLES)
@pytest.mark.parametrize("min_nodes", [1, 3, 5])
def test_matches_bruteforce_oracle(source_text, min_nodes):
    fp = fingerprint(
        SubjectSource("s", source_text), FingerprintConfig(min_subtree_nodes=min_nodes)
    )
    got = Counter({shape.encoding: n for shape, n in fp.counts.items()})
    assert got == oracle_shapes(source_text, min_nodes)


def test_node_counts_consistent_with_encoding():
    fp = fingerprint(SubjectSource("s", SAMPLES[2]))
    for shape, _ in fp.counts.items():
        # every visited subtree contributes exactly one "(" per node
        assert shape.node_count == shape.encoding.count("(")
        assert shape.node_count >= 3


def test_rename_invariance():
    a = "def f(alpha):\n    beta = alpha * 2\n    return beta\n"
    b = "def zz(q):\n    w = q * 2\n    return w\n"
    assert fingerprint(SubjectSource("a", a)) == fingerprint(SubjectSource("b", b))


def test_literal_invariance():
    a = "x = 'hello'\ny = x + 'a'\n"
    b = "x = 42\ny = x + 'zzz'\n"
    assert fingerprint(SubjectSource("a", a)) == fingerprint(SubjectSource("b", b))


def test_docstrings_excluded():
    plain = "def f(x):\n    return x\n"
    documented = 'def f(x):\n    """Docs here."""\n    return x\n'
    assert fingerprint(SubjectSource("a", plain)) == fingerprint(SubjectSource("b", documented))


def test_structural_change_is_visible():
    a = "def f(x):\n    return x + 1\n"
    b = "def f(x):\n    if x:\n        return x + 1\n    return 0\n"
    assert fingerprint(SubjectSource("a", a)) != fingerprint(SubjectSource("b", b))


def test_syntax_error_propagates():
    with pytest.raises(SyntaxError):
        fingerprint(SubjectSource("bad", "def broken(:\n"))


def test_trivial_source_yields_empty_multiset():
    fp = fingerprint(SubjectSource("t", "x\n"), FingerprintConfig(min_subtree_nodes=10))
    assert fp.total() == 0


@pytest.mark.parametrize("source_text", SAMPLES)
def test_serialize_roundtrip(source_text):
    fp = fingerprint(SubjectSource("s", source_text))
    assert ShapeMultiset.deserialize(fp.serialize()) == fp


@given(st.dictionaries(st.text(alphabet="ab()[],", min_size=1, max_size=8), st.integers(1, 9), max_size=6))
def test_serialize_roundtrip_arbitrary_counts(raw):
    # tab and newline are the only reserved characters in the wire format
    ms = ShapeMultiset(Counter({SubtreeShape(k, k.count("(")): v for k, v in raw.items()}))
    assert ShapeMultiset.deserialize(ms.serialize()) == ms


def test_locate_entry_by_decorator_marker():
    src = "def tool(fn):\n    return fn\n\n@tool\ndef act(a, b):\n    return a\n"
    entry = locate_entry(SubjectSource("s", src))
    assert entry.name == "act"
    assert entry.params == ("a", "b")


def test_locate_entry_dotted_decorator():
    src = "@mcp.tool()\ndef act(x):\n    return x\n"
    entry = locate_entry(SubjectSource("s", src))
    assert entry.name == "act"


def test_locate_entry_name_override_wins():
    src = "@mcp.tool()\ndef act(x):\n    return x\n\ndef other(y):\n    return y\n"
    entry = locate_entry(SubjectSource("s", src, entry_name="other"))
    assert entry.name == "other"


def test_locate_entry_missing():
    with pytest.raises(NoEntryFound):
        locate_entry(SubjectSource("s", "def plain(x):\n    return x\n"))


def test_locate_entry_ambiguous():
    src = "@mcp.tool()\ndef a(x):\n    return x\n\n@mcp.tool()\ndef b(x):\n    return x\n"
    with pytest.raises(AmbiguousEntry):
        locate_entry(SubjectSource("s", src))


def test_entry_spans_cover_body_statements():
    src = "@mcp.tool()\ndef act(x):\n    y = x + 1\n    return y\n"
    entry = locate_entry(SubjectSource("s", src))
    assert len(entry.body_spans) == 2
    start, end = entry.body_spans[0]
    assert src.encode()[start:end].decode() == "y = x + 1"
