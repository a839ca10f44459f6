"""Multiset-Jaccard structural similarity and the diversity gate.

Two fingerprints are compared by the ratio of shared subtree shapes to
total subtree shapes, counting multiplicities: sum of per-shape minima
over sum of per-shape maxima. An index of previously accepted
fingerprints (partitioned by behavior) supports nearest-neighbor lookup
and the threshold gate that rejects candidates too close to an accepted
tool.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import TooFewElements
from .fingerprint import ShapeMultiset


def jaccard(a: ShapeMultiset, b: ShapeMultiset) -> float:
    """Multiset Jaccard similarity in [0, 1].

    Two empty multisets are trivially identical (score 1); an empty
    multiset against a non-empty one scores 0.
    """
    return float(jaccard_exact(a, b))


def jaccard_exact(a: ShapeMultiset, b: ShapeMultiset) -> Fraction:
    """Exact rational value of the multiset Jaccard similarity."""
    num = 0
    den = 0
    for shape in a.counts.keys() | b.counts.keys():
        ca = a.counts.get(shape, 0)
        cb = b.counts.get(shape, 0)
        num += min(ca, cb)
        den += max(ca, cb)
    if den == 0:
        return Fraction(1)
    return Fraction(num, den)


@dataclass
class CorpusIndex:
    """Accepted fingerprints in acceptance order, partitioned by behavior.

    Each partition entry is (tool_id, fingerprint, source_text); source
    text rides along so rejection feedback can embed the nearest
    accepted implementation.
    """

    partitions: dict[str, list[tuple[str, ShapeMultiset, str]]] = field(default_factory=dict)

    def insert(self, behavior: str, tool_id: str, fp: ShapeMultiset, source_text: str = "") -> None:
        part = self.partitions.setdefault(behavior, [])
        if any(tid == tool_id for tid, _, _ in part):
            raise ValueError(f"duplicate tool_id {tool_id!r} in behavior {behavior!r}")
        part.append((tool_id, fp, source_text))

    def partition(self, behavior: str) -> list[tuple[str, ShapeMultiset, str]]:
        return self.partitions.get(behavior, [])

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = []
        for behavior, entries in self.partitions.items():
            bdir = directory / behavior
            bdir.mkdir(exist_ok=True)
            for i, (tool_id, fp, src) in enumerate(entries):
                stem = f"{i:05d}__{tool_id}"
                (bdir / f"{stem}.fp").write_text(fp.serialize())
                (bdir / f"{stem}.py").write_text(src)
                manifest.append({"behavior": behavior, "tool_id": tool_id, "stem": stem})
        (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    @classmethod
    def load(cls, directory: str | Path) -> "CorpusIndex":
        directory = Path(directory)
        manifest = json.loads((directory / "manifest.json").read_text())
        index = cls()
        for entry in manifest:
            bdir = directory / entry["behavior"]
            fp = ShapeMultiset.deserialize((bdir / f"{entry['stem']}.fp").read_text())
            src = (bdir / f"{entry['stem']}.py").read_text()
            index.insert(entry["behavior"], entry["tool_id"], fp, src)
        return index


@dataclass(frozen=True)
class GateDecision:
    """Outcome of the diversity gate for one candidate."""

    accepted: bool
    threshold: float
    nearest_id: str | None = None
    nearest_score: float | None = None


def nearest(candidate: ShapeMultiset, index: CorpusIndex, behavior: str) -> tuple[str, float] | None:
    """The most similar accepted entry for this behavior, or None when the
    partition is empty. Ties break toward the earliest-accepted entry."""
    best: tuple[str, Fraction] | None = None
    for tool_id, fp, _ in index.partition(behavior):
        score = jaccard_exact(candidate, fp)
        if best is None or score > best[1]:
            best = (tool_id, score)
    if best is None:
        return None
    return best[0], float(best[1])


def diversity_gate(
    candidate: ShapeMultiset, index: CorpusIndex, behavior: str, tau: float
) -> GateDecision:
    """Reject a candidate whose maximum similarity to an accepted tool
    strictly exceeds tau. An empty partition always accepts."""
    if not 0 < tau <= 1:
        raise ValueError("tau must be in (0, 1]")
    found = nearest(candidate, index, behavior)
    if found is None:
        return GateDecision(accepted=True, threshold=tau)
    nearest_id, score = found
    return GateDecision(
        accepted=score <= tau,
        threshold=tau,
        nearest_id=nearest_id,
        nearest_score=score,
    )


def mean_pairwise_sim(multisets: list[ShapeMultiset]) -> float:
    """Mean Jaccard similarity over all unordered pairs."""
    n = len(multisets)
    if n < 2:
        raise TooFewElements("need at least 2 multisets")
    total = Fraction(0)
    pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += jaccard_exact(multisets[i], multisets[j])
            pairs += 1
    return float(total / pairs)
