"""Corpus ingestion, Trojan-dataset construction, and detector benchmarking.

Corpora are JSONL files of tool records (name, description, entry
signature, full source). Cleaning drops records with missing fields and
deduplicates by source hash then metadata. Trojan construction splits a
benign corpus into twelve near-equal behavior groups and embeds one
payload per record, reusing payloads round-robin within each group.
External detectors are wrapped as subprocess adapters and scored with
per-behavior false-negative and per-category false-positive rates, plus
a combined any-flag column.
"""
from __future__ import annotations

import ast
import hashlib
import json
import random
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .behaviors import ALL_BEHAVIORS, BehaviorId
from .embedding import Binding, PayloadSpec, embed_payload
from .errors import BindingError, CoverageGap, MalformedRecord
from .fingerprint import SubjectSource, locate_entry

BENIGN_LABEL = "benign"

# Behaviors receiving the +1 record when the benign set does not split
# evenly into twelve groups, in priority order.
_EXTRA_PRIORITY = (
    BehaviorId.RemoteDataExfiltration,
    BehaviorId.LocalDataExfiltration,
    BehaviorId.FileToRemoteExfiltration,
    BehaviorId.EnvCredentialHarvesting,
    BehaviorId.ApiKeyAbuse,
    BehaviorId.LocalFileDeletion,
    BehaviorId.DatabaseRecordDeletion,
    BehaviorId.MaliciousDatabaseInjection,
    BehaviorId.RemoteProgramDownloading,
    BehaviorId.CpuComputeHijacking,
    BehaviorId.GpuComputeHijacking,
    BehaviorId.ResponseTimeAmplification,
)


@dataclass(frozen=True)
class ToolRecord:
    """One corpus entry in the JSONL schema."""

    name: str
    description: str
    entry_signature: str
    source: str
    category: str | None = None
    origin: str | None = None

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "description": self.description,
            "entry": self.entry_signature,
            "source": self.source,
        }
        if self.category is not None:
            out["category"] = self.category
        if self.origin is not None:
            out["origin"] = self.origin
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ToolRecord":
        if not isinstance(data, dict):
            raise MalformedRecord(f"record is not an object: {type(data).__name__}")
        for key in ("name", "description", "entry", "source"):
            if key in data and not isinstance(data[key], str):
                raise MalformedRecord(f"field {key!r} must be a string")
        return cls(
            name=data.get("name", ""),
            description=data.get("description", ""),
            entry_signature=data.get("entry", ""),
            source=data.get("source", ""),
            category=data.get("category"),
            origin=data.get("origin"),
        )


@dataclass
class LabeledDataset:
    """Records plus one label each: 'benign' or a behavior value."""

    records: list[ToolRecord]
    labels: list[str]

    def __post_init__(self):
        if len(self.records) != len(self.labels):
            raise ValueError("labels must align with records")

    def record_id(self, i: int) -> str:
        return f"{i:05d}_{self.records[i].name}"


def read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            rows.append(json.loads(line))
    return rows


def write_jsonl(path: str | Path, rows: list[dict]) -> None:
    with open(path, "w") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")


def clean_corpus(raw_records: list[dict]) -> tuple[list[ToolRecord], list[dict]]:
    """Drop incomplete records, then deduplicate by source hash and by
    (name, description); survivors keep input order."""
    rejections: list[dict] = []
    survivors: list[ToolRecord] = []
    seen_hashes: set[str] = set()
    seen_meta: set[tuple[str, str]] = set()
    for i, raw in enumerate(raw_records):
        try:
            record = ToolRecord.from_json(raw)
        except MalformedRecord as exc:
            rejections.append({"index": i, "reason": f"malformed: {exc}"})
            continue
        if not record.description:
            rejections.append({"index": i, "reason": "missing description"})
            continue
        if not record.source:
            rejections.append({"index": i, "reason": "missing source"})
            continue
        digest = hashlib.sha256(record.source.encode()).hexdigest()
        if digest in seen_hashes:
            rejections.append({"index": i, "reason": "duplicate source hash"})
            continue
        meta = (record.name, record.description)
        if meta in seen_meta:
            rejections.append({"index": i, "reason": "duplicate metadata"})
            continue
        seen_hashes.add(digest)
        seen_meta.add(meta)
        survivors.append(record)
    return survivors, rejections


def partition_sizes(n: int) -> dict[BehaviorId, int]:
    """Near-equal twelve-way split; the remainder goes to behaviors in
    the fixed priority order."""
    base = n // 12
    extra = n % 12
    sizes = {b: base for b in ALL_BEHAVIORS}
    for b in _EXTRA_PRIORITY[:extra]:
        sizes[b] += 1
    return sizes


def _standalone_payload(standalone_source: str, behavior: BehaviorId, binding: Binding) -> PayloadSpec:
    """Wrap a standalone tool function as an embeddable payload: its
    definition followed by one invocation."""
    tree = ast.parse(standalone_source)
    funcs = [n for n in tree.body if isinstance(n, ast.FunctionDef)]
    if not funcs:
        raise ValueError("standalone payload source has no top-level function")
    fn = funcs[0]
    if binding is Binding.REUSE_TOOL_INPUTS and fn.args.args:
        call = f"{fn.name}(__TOOL_ARGS__)"
    elif fn.args.args:
        call = f"{fn.name}([])"
    else:
        call = f"{fn.name}()"
    return PayloadSpec(
        behavior=behavior.value,
        payload_source=standalone_source.rstrip("\n") + "\n" + call,
        binding=binding,
    )


def default_binding(behavior: BehaviorId) -> Binding:
    """Exfiltration payloads operate on the host tool's own inputs; all
    other behaviors run on predefined fixture constants."""
    if behavior in (BehaviorId.RemoteDataExfiltration, BehaviorId.LocalDataExfiltration):
        return Binding.REUSE_TOOL_INPUTS
    return Binding.PREDEFINED_CONSTANTS


@dataclass
class TrojanBuildReport:
    per_behavior_counts: dict[str, int] = field(default_factory=dict)
    payload_usage: dict[str, dict[str, int]] = field(default_factory=dict)
    rebindings: list[str] = field(default_factory=list)


def build_trojan_dataset(
    benign: list[ToolRecord],
    standalone_index: dict[BehaviorId, list[SubjectSource]],
    seed: int,
) -> tuple[LabeledDataset, TrojanBuildReport]:
    """Embed one payload into every benign record.

    The benign set is shuffled under the seed and partitioned into twelve
    near-equal groups, one per behavior; payloads cycle round-robin
    within each group. Records whose entry takes no parameters fall back
    to constant binding when input reuse was requested.
    """
    if not benign:
        raise ValueError("benign set must be non-empty")
    for behavior in ALL_BEHAVIORS:
        if not standalone_index.get(behavior):
            raise ValueError(f"no standalone payloads for {behavior.name}")

    order = list(range(len(benign)))
    random.Random(seed).shuffle(order)
    sizes = partition_sizes(len(benign))

    report = TrojanBuildReport()
    records: list[ToolRecord] = []
    labels: list[str] = []
    pos = 0
    for behavior in ALL_BEHAVIORS:
        group = order[pos : pos + sizes[behavior]]
        pos += sizes[behavior]
        payloads = standalone_index[behavior]
        usage = {p.tool_id: 0 for p in payloads}
        for j, idx in enumerate(group):
            record = benign[idx]
            payload = payloads[j % len(payloads)]
            usage[payload.tool_id] += 1
            trojan = _embed_into_record(record, payload, behavior, seed + idx, report)
            records.append(trojan)
            labels.append(behavior.value)
        report.per_behavior_counts[behavior.value] = len(group)
        report.payload_usage[behavior.value] = usage
    return LabeledDataset(records, labels), report


def _embed_into_record(
    record: ToolRecord,
    payload: SubjectSource,
    behavior: BehaviorId,
    seed: int,
    report: TrojanBuildReport,
) -> ToolRecord:
    source = SubjectSource(
        tool_id=record.name or "tool",
        source_text=record.source,
        entry_name=_entry_name_from_signature(record.entry_signature),
    )
    entry = locate_entry(source)
    binding = default_binding(behavior)
    spec = _standalone_payload(payload.source_text, behavior, binding)
    try:
        embedded = embed_payload(source, entry, spec, seed)
    except BindingError:
        report.rebindings.append(record.name)
        spec = _standalone_payload(payload.source_text, behavior, Binding.PREDEFINED_CONSTANTS)
        embedded = embed_payload(source, entry, spec, seed)
    return ToolRecord(
        name=record.name,
        description=record.description,
        entry_signature=record.entry_signature,
        source=embedded.source_text,
        category=record.category,
        origin=record.origin,
    )


def _entry_name_from_signature(signature: str) -> str | None:
    if not signature:
        return None
    name = signature.split("(", 1)[0].strip()
    if name.startswith("def "):
        name = name[4:].strip()
    return name or None


def loc(source: str) -> int:
    """Physical lines of code: non-empty lines."""
    return sum(1 for line in source.splitlines() if line.strip())


def loc_stats(records: list[ToolRecord], bin_width: int = 50) -> dict:
    """LOC histogram plus the fraction of records under 100 lines."""
    counts = [loc(r.source) for r in records]
    histogram: dict[str, int] = {}
    for c in counts:
        lo = (c // bin_width) * bin_width
        key = f"{lo}-{lo + bin_width - 1}"
        histogram[key] = histogram.get(key, 0) + 1
    below_100 = sum(1 for c in counts if c < 100)
    return {
        "count": len(counts),
        "loc": counts,
        "histogram": histogram,
        "fraction_below_100": below_100 / len(counts) if counts else 0.0,
    }


VERDICT_MALICIOUS = "malicious"
VERDICT_BENIGN = "benign"
VERDICT_ERROR = "error"


@dataclass(frozen=True)
class DetectorAdapter:
    """External detector wrapped as a command.

    The command receives the tool directory path as its final argument
    and reports via a one-line JSON verdict on stdout ({"verdict":
    "malicious"|"benign"}) or, failing that, its exit code (0 benign,
    1 malicious, anything else an error).
    """

    detector_id: str
    command: tuple[str, ...]
    timeout_s: float = 60.0

    def invoke(self, tool_dir: str | Path) -> str:
        try:
            proc = subprocess.run(
                list(self.command) + [str(tool_dir)],
                capture_output=True,
                timeout=self.timeout_s,
            )
        except (subprocess.TimeoutExpired, OSError):
            return VERDICT_ERROR
        for line in proc.stdout.decode(errors="replace").splitlines():
            line = line.strip()
            if line.startswith("{"):
                try:
                    verdict = json.loads(line).get("verdict", "")
                    if verdict in (VERDICT_MALICIOUS, VERDICT_BENIGN):
                        return verdict
                except ValueError:
                    pass
        if proc.returncode == 0:
            return VERDICT_BENIGN
        if proc.returncode == 1:
            return VERDICT_MALICIOUS
        return VERDICT_ERROR


def run_detectors(
    dataset: LabeledDataset,
    adapters: list[DetectorAdapter],
    parallelism: int = 4,
) -> list[dict]:
    """Invoke every adapter on a private copy of every record's tool dir;
    returns the raw verdict matrix as rows of {record_id, detector_id, verdict}."""

    def one_cell(i: int, adapter: DetectorAdapter) -> dict:
        record = dataset.records[i]
        tool_dir = Path(tempfile.mkdtemp(prefix="toolaudit_bench_"))
        try:
            (tool_dir / "tool.py").write_text(record.source)
            (tool_dir / "metadata.json").write_text(
                json.dumps({"name": record.name, "description": record.description, "entry": record.entry_signature})
            )
            verdict = adapter.invoke(tool_dir)
        finally:
            shutil.rmtree(tool_dir, ignore_errors=True)
        return {"record_id": dataset.record_id(i), "detector_id": adapter.detector_id, "verdict": verdict}

    cells = [(i, a) for i in range(len(dataset.records)) for a in adapters]
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        return list(pool.map(lambda c: one_cell(*c), cells))


COMBINED_ID = "combined"


@dataclass
class MetricsReport:
    """FNR per behavior and FPR per category, per detector plus combined."""

    fnr_per_behavior: dict[str, dict[str, float]]
    fpr_per_category: dict[str, dict[str, float]]
    error_rate: dict[str, float]
    sample_counts: dict[str, int]

    def to_json(self) -> dict:
        return {
            "fnr_per_behavior": self.fnr_per_behavior,
            "fpr_per_category": self.fpr_per_category,
            "error_rate": self.error_rate,
            "sample_counts": self.sample_counts,
        }

    def render_text(self) -> str:
        lines = []
        if self.fnr_per_behavior:
            detectors = sorted(next(iter(self.fnr_per_behavior.values())).keys())
            lines.append("FNR per behavior")
            lines.append("behavior\t" + "\t".join(detectors))
            for behavior, row in self.fnr_per_behavior.items():
                lines.append(behavior + "\t" + "\t".join(f"{row[d]:.3f}" for d in detectors))
        if self.fpr_per_category:
            detectors = sorted(next(iter(self.fpr_per_category.values())).keys())
            lines.append("FPR per category")
            lines.append("category\t" + "\t".join(detectors))
            for category, row in self.fpr_per_category.items():
                lines.append(category + "\t" + "\t".join(f"{row[d]:.3f}" for d in detectors))
        return "\n".join(lines) + "\n"


def compute_metrics(matrix: list[dict], dataset: LabeledDataset) -> MetricsReport:
    """Score a verdict matrix.

    Errors count as not-flagged (conservative toward the detector) and
    surface in a separate per-detector error rate. The combined column
    flags a record when any detector flags it.
    """
    detector_ids = sorted({row["detector_id"] for row in matrix})
    verdicts: dict[tuple[str, str], str] = {
        (row["record_id"], row["detector_id"]): row["verdict"] for row in matrix
    }
    record_ids = [dataset.record_id(i) for i in range(len(dataset.records))]
    missing = [
        (rid, d) for rid in record_ids for d in detector_ids if (rid, d) not in verdicts
    ]
    if missing:
        raise CoverageGap(f"matrix missing {len(missing)} cells, e.g. {missing[0]}")

    def flagged(rid: str, detector: str) -> bool:
        return verdicts[(rid, detector)] == VERDICT_MALICIOUS

    columns = detector_ids + [COMBINED_ID]

    def flagged_any(rid: str) -> bool:
        return any(flagged(rid, d) for d in detector_ids)

    def flag(rid: str, column: str) -> bool:
        return flagged_any(rid) if column == COMBINED_ID else flagged(rid, column)

    fnr: dict[str, dict[str, float]] = {}
    counts: dict[str, int] = {}
    by_behavior: dict[str, list[str]] = {}
    by_category: dict[str, list[str]] = {}
    for i, label in enumerate(dataset.labels):
        rid = record_ids[i]
        if label == BENIGN_LABEL:
            category = dataset.records[i].category or "Other"
            by_category.setdefault(category, []).append(rid)
        else:
            by_behavior.setdefault(label, []).append(rid)

    for behavior, rids in by_behavior.items():
        counts[behavior] = len(rids)
        fnr[behavior] = {
            col: sum(1 for rid in rids if not flag(rid, col)) / len(rids) for col in columns
        }
    fpr: dict[str, dict[str, float]] = {}
    for category, rids in by_category.items():
        counts[f"benign:{category}"] = len(rids)
        fpr[category] = {
            col: sum(1 for rid in rids if flag(rid, col)) / len(rids) for col in columns
        }

    error_rate = {
        d: sum(1 for rid in record_ids if verdicts[(rid, d)] == VERDICT_ERROR) / len(record_ids)
        for d in detector_ids
    } if record_ids else {}

    return MetricsReport(
        fnr_per_behavior=fnr,
        fpr_per_category=fpr,
        error_rate=error_rate,
        sample_counts=counts,
    )
