"""Corpus cleaning, Trojan dataset construction, and benchmark metrics."""
import json
import random
import sys

import pytest

from conftest import standalone_sources
from toolaudit import ALL_BEHAVIORS, BehaviorId, CoverageGap
from toolaudit.corpus import (
    BENIGN_LABEL,
    COMBINED_ID,
    DetectorAdapter,
    LabeledDataset,
    ToolRecord,
    build_trojan_dataset,
    clean_corpus,
    compute_metrics,
    loc,
    loc_stats,
    partition_sizes,
    run_detectors,
)


def raw(name, source="def f(x):\n    return x\n", description="does a thing", **extra):
    return {"name": name, "description": description, "entry": "f", "source": source, **extra}


def test_clean_drops_incomplete_and_duplicates():
    rows = [
        raw("a"),
        raw("b", source=""),                      # missing source
        raw("c", description=""),                 # missing description
        raw("a2"),                                # duplicate source hash of "a"
        raw("a", source="def f(x):\n    return x + 1\n"),  # duplicate (name, description)
        {"name": 3},                              # malformed types
        "not an object",
        raw("d", source="def g(y):\n    return y * 2\n"),
    ]
    kept, rejections = clean_corpus(rows)
    assert [r.name for r in kept] == ["a", "d"]
    assert len(rejections) == 6
    reasons = {r["index"]: r["reason"] for r in rejections}
    assert "missing source" in reasons[1]
    assert "duplicate source hash" in reasons[3]
    assert "duplicate metadata" in reasons[4]
    assert "malformed" in reasons[5] and "malformed" in reasons[6]


def test_clean_matches_bruteforce_dedup_on_random_corpora():
    rng = random.Random(12)
    sources = [f"def f(x):\n    return x + {i}\n" for i in range(8)]
    rows = [
        raw(f"n{rng.randint(0, 5)}", source=rng.choice(sources), description=f"d{rng.randint(0, 3)}")
        for _ in range(60)
    ]
    kept, _ = clean_corpus(rows)
    # oracle: first-wins filtering by source text then metadata pair
    expected = []
    seen_src, seen_meta = set(), set()
    for row in rows:
        key_meta = (row["name"], row["description"])
        if row["source"] in seen_src or key_meta in seen_meta:
            continue
        seen_src.add(row["source"])
        seen_meta.add(key_meta)
        expected.append(row["name"])
    assert [r.name for r in kept] == expected


def test_partition_sizes_are_near_equal():
    for n in (12, 13, 100, 5287, 7):
        sizes = partition_sizes(n)
        assert sum(sizes.values()) == n
        assert max(sizes.values()) - min(sizes.values()) <= 1


def test_trojan_build_labels_and_roundrobin():
    benign = [ToolRecord.from_json(raw(f"t{i}", source=f"def f(x):\n    y = x + {i}\n    return y\n")) for i in range(30)]
    payloads = {b: standalone_sources(b) for b in ALL_BEHAVIORS}
    dataset, report = build_trojan_dataset(benign, payloads, seed=5)
    assert len(dataset.records) == 30
    assert sorted(report.per_behavior_counts.values()) == [2] * 6 + [3] * 6
    for usage in report.payload_usage.values():
        counts = list(usage.values())
        assert max(counts) - min(counts) <= 1
    # every record's source still parses and differs from its benign original
    originals = {r.name: r.source for r in benign}
    for rec, label in zip(dataset.records, dataset.labels):
        assert label in {b.value for b in ALL_BEHAVIORS}
        assert rec.source != originals[rec.name]
        compile(rec.source, "<trojan>", "exec")


def test_trojan_build_rebinds_paramless_entries():
    benign = [ToolRecord.from_json({"name": "noargs", "description": "d", "entry": "f",
                                    "source": "def f():\n    y = 1\n    return y\n"})]
    payloads = {b: standalone_sources(b) for b in ALL_BEHAVIORS}
    dataset, report = build_trojan_dataset(benign, payloads, seed=0)
    label = dataset.labels[0]
    if label in ("remote_data_exfiltration", "local_data_exfiltration"):
        assert report.rebindings == ["noargs"]


def test_loc_counts_non_empty_lines():
    assert loc("a = 1\n\n\nb = 2\n") == 2
    stats = loc_stats([ToolRecord.from_json(raw("a", source="x = 1\n" * 30)),
                       ToolRecord.from_json(raw("b", source="x = 1\n" * 150))])
    assert stats["count"] == 2
    assert stats["fraction_below_100"] == 0.5
    assert stats["histogram"] == {"0-49": 1, "150-199": 1}


def make_dataset():
    records = [
        ToolRecord.from_json(raw("m1")),
        ToolRecord.from_json(raw("m2")),
        ToolRecord.from_json(raw("b1", category="Finance")),
        ToolRecord.from_json(raw("b2", category="Finance")),
        ToolRecord.from_json(raw("b3")),
    ]
    labels = ["api_key_abuse", "api_key_abuse", BENIGN_LABEL, BENIGN_LABEL, BENIGN_LABEL]
    return LabeledDataset(records, labels)


def matrix_for(dataset, verdict_by_detector):
    rows = []
    for i in range(len(dataset.records)):
        rid = dataset.record_id(i)
        for det, verdicts in verdict_by_detector.items():
            rows.append({"record_id": rid, "detector_id": det, "verdict": verdicts[i]})
    return rows


def test_metrics_hand_computed():
    dataset = make_dataset()
    matrix = matrix_for(dataset, {
        "d1": ["malicious", "benign", "benign", "malicious", "benign"],
        "d2": ["benign", "malicious", "error", "benign", "benign"],
    })
    report = compute_metrics(matrix, dataset)
    # d1 catches m1 only: FNR 1/2; d2 catches m2 only: FNR 1/2; combined catches both
    assert report.fnr_per_behavior["api_key_abuse"] == {"d1": 0.5, "d2": 0.5, COMBINED_ID: 0.0}
    # benign: d1 flags b2 (Finance 1/2, Other 0); d2's error on b1 counts as not flagged
    assert report.fpr_per_category["Finance"] == {"d1": 0.5, "d2": 0.0, COMBINED_ID: 0.5}
    assert report.fpr_per_category["Other"] == {"d1": 0.0, "d2": 0.0, COMBINED_ID: 0.0}
    assert report.error_rate == {"d1": 0.0, "d2": 0.2}
    assert report.sample_counts == {"api_key_abuse": 2, "benign:Finance": 2, "benign:Other": 1}


def test_metrics_reject_missing_cells():
    dataset = make_dataset()
    matrix = matrix_for(dataset, {"d1": ["malicious"] * 5})[:-1]
    with pytest.raises(CoverageGap):
        compute_metrics(matrix, dataset)


def test_metrics_report_serializes_and_renders():
    dataset = make_dataset()
    matrix = matrix_for(dataset, {"d1": ["malicious", "benign", "benign", "benign", "benign"]})
    report = compute_metrics(matrix, dataset)
    blob = json.loads(json.dumps(report.to_json()))
    assert blob["fnr_per_behavior"]["api_key_abuse"]["d1"] == 0.5
    text = report.render_text()
    assert "FNR per behavior" in text and "0.500" in text


def adapter_script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text("#!/usr/bin/env python3\nimport sys\n" + body)
    return DetectorAdapter(detector_id=name, command=(sys.executable, str(path)), timeout_s=20)


def test_adapter_wire_contract(tmp_path):
    dataset = LabeledDataset([ToolRecord.from_json(raw("only"))], ["benign"])
    by_exit = adapter_script(tmp_path, "by_exit", "sys.exit(1)\n")
    by_json = adapter_script(tmp_path, "by_json", 'print(\'{"verdict": "benign"}\')\nsys.exit(1)\n')
    by_error = adapter_script(tmp_path, "by_error", "sys.exit(7)\n")
    reads_dir = adapter_script(
        tmp_path, "reads_dir",
        "import os\ntool = open(os.path.join(sys.argv[1], 'tool.py')).read()\n"
        "sys.exit(1 if 'def f' in tool else 0)\n",
    )
    matrix = run_detectors(dataset, [by_exit, by_json, by_error, reads_dir], parallelism=2)
    verdicts = {row["detector_id"]: row["verdict"] for row in matrix}
    assert verdicts["by_exit"] == "malicious"
    assert verdicts["by_json"] == "benign"  # JSON verdict takes precedence over exit code
    assert verdicts["by_error"] == "error"
    assert verdicts["reads_dir"] == "malicious"
