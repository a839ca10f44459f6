"""Command-line entry point for batch analysis workflows.

Every subcommand maps onto one library operation (or a fixed composition
of them): fingerprinting and similarity scoring, diversity gating,
must-execute analysis and payload embedding, sandboxed execution and
behavior judgement, the generate-verify loop, and corpus/benchmark
plumbing. Exit codes: 0 success, 1 analysis-level negative under
--strict, 2 usage error, 3 environment error.
"""
from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .behaviors import BehaviorId
from .corpus import (
    DetectorAdapter,
    LabeledDataset,
    ToolRecord,
    build_trojan_dataset,
    clean_corpus,
    compute_metrics,
    loc_stats,
    read_jsonl,
    run_detectors,
    write_jsonl,
)
from .embedding import (
    Binding,
    PayloadSpec,
    choose_insertion_point,
    embed_payload,
    must_execute_region,
)
from .errors import IoFailure, PortUnavailable, SandboxBreachAttempt, ToolAuditError
from .fingerprint import (
    FingerprintConfig,
    ShapeMultiset,
    SubjectSource,
    fingerprint,
    locate_entry,
)
from .loop import DirectorySource, LoopConfig, run_loop
from .oracles import OracleThresholds, asr_eval, judge, judge_all
from .sandbox import DEFAULT_TIMEOUT_S, FixtureConstants, execute, provision
from .similarity import CorpusIndex, diversity_gate, jaccard

EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_ENVIRONMENT = 3

_FLOAT_KEYS = {
    "cpu_busy_s",
    "latency_budget_s",
    "cpu_util",
    "cpu_sustain_s",
    "gpu_util",
    "gpu_mem",
    "gpu_sustain_s",
    "latency_s",
}


def load_config(path: str | None) -> dict:
    """Key=value configuration: fixture constants and oracle thresholds.

    Lines starting with # are comments; injected_record takes a JSON list.
    """
    if path is None:
        return {}
    values: dict = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"bad config line (expected key=value): {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "injected_record":
            values[key] = tuple(json.loads(value))
        elif key in _FLOAT_KEYS:
            values[key] = float(value)
        else:
            values[key] = value
    return values


def _split_config(values: dict) -> tuple[FixtureConstants, OracleThresholds]:
    const_fields = {f.name for f in dataclasses.fields(FixtureConstants)}
    thresh_fields = {f.name for f in dataclasses.fields(OracleThresholds)}
    unknown = set(values) - const_fields - thresh_fields
    if unknown:
        raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
    constants = FixtureConstants(**{k: v for k, v in values.items() if k in const_fields})
    thresholds = OracleThresholds(**{k: v for k, v in values.items() if k in thresh_fields})
    return constants, thresholds


def _subject(path: str, entry: str | None = None) -> SubjectSource:
    return SubjectSource(tool_id=Path(path).stem, source_text=Path(path).read_text(), entry_name=entry)


def _emit(ctx: click.Context, payload: dict, text: str | None = None) -> None:
    if text is not None:
        click.echo(text, nl=False)
    report = ctx.obj.get("report")
    if report:
        Path(report).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _behavior_option(func):
    return click.option(
        "--behavior",
        required=True,
        type=click.Choice([b.value for b in BehaviorId]),
        callback=lambda ctx, param, v: BehaviorId.from_string(v),
    )(func)


@click.group()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--report", type=click.Path(dir_okay=False), default=None)
@click.option("--jobs", type=int, default=4, show_default=True)
@click.pass_context
def main(ctx, seed, config_path, report, jobs):
    """Static and dynamic analysis workbench for agent tool ecosystems."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.obj["report"] = report
    ctx.obj["jobs"] = jobs
    constants, thresholds = _split_config(load_config(config_path))
    ctx.obj["constants"] = constants
    ctx.obj["thresholds"] = thresholds


@main.command("fingerprint")
@click.argument("source_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-nodes", type=int, default=3, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def fingerprint_cmd(ctx, source_file, min_nodes, out):
    """Print (or save) a tool's structural fingerprint."""
    fp = fingerprint(_subject(source_file), FingerprintConfig(min_subtree_nodes=min_nodes))
    text = fp.serialize()
    if out:
        Path(out).write_text(text)
        text = f"wrote {fp.total()} shapes ({len(fp)} distinct) to {out}\n"
    _emit(ctx, {"distinct_shapes": len(fp), "total_shapes": fp.total()}, text)


@main.command("sim")
@click.argument("file_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("file_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-nodes", type=int, default=3, show_default=True)
@click.pass_context
def sim_cmd(ctx, file_a, file_b, min_nodes):
    """Structural similarity of two tools, three decimals."""
    config = FingerprintConfig(min_subtree_nodes=min_nodes)
    score = jaccard(fingerprint(_subject(file_a), config), fingerprint(_subject(file_b), config))
    _emit(ctx, {"similarity": score}, f"{score:.3f}\n")


@main.command("gate")
@click.argument("candidate", type=click.Path(exists=True, dir_okay=False))
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True, file_okay=False))
@_behavior_option
@click.option("--tau", type=float, default=0.7, show_default=True)
@click.option("--strict", is_flag=True)
@click.pass_context
def gate_cmd(ctx, candidate, index_dir, behavior, tau, strict):
    """Diversity gate against an accepted-tool index."""
    index = CorpusIndex.load(index_dir)
    fp = fingerprint(_subject(candidate))
    decision = diversity_gate(fp, index, behavior.value, tau)
    verdict = "accept" if decision.accepted else "reject"
    score = decision.nearest_score if decision.nearest_score is not None else 0.0
    payload = {
        "accepted": decision.accepted,
        "tau": tau,
        "nearest_id": decision.nearest_id,
        "nearest_score": score,
    }
    _emit(ctx, payload, f"{verdict} nearest={decision.nearest_id} sim={score:.3f}\n")
    if strict and not decision.accepted:
        sys.exit(EXIT_NEGATIVE)


@main.command("region")
@click.argument("source_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--entry", default=None, help="Entry function name override.")
@click.pass_context
def region_cmd(ctx, source_file, entry):
    """Must-execute region of the entry body, as JSON spans."""
    source = _subject(source_file, entry)
    descriptor = locate_entry(source)
    region = must_execute_region(source, descriptor)
    spans = [list(locus.source_span) for locus in region.loci]
    payload = {"entry": descriptor.name, "spans": spans}
    _emit(ctx, payload, json.dumps(spans) + "\n")


@main.command("embed")
@click.argument("source_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--payload", "payload_file", required=True, type=click.Path(exists=True, dir_okay=False))
@_behavior_option
@click.option("--binding", type=click.Choice([b.value for b in Binding]), default=Binding.PREDEFINED_CONSTANTS.value, show_default=True)
@click.option("--entry", default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def embed_cmd(ctx, source_file, payload_file, behavior, binding, entry, out):
    """Splice a payload into a tool's must-execute region."""
    source = _subject(source_file, entry)
    descriptor = locate_entry(source)
    spec = PayloadSpec(
        behavior=behavior.value,
        payload_source=Path(payload_file).read_text(),
        binding=Binding(binding),
    )
    seed = ctx.obj["seed"]
    region = must_execute_region(source, descriptor)
    anchor = choose_insertion_point(region, seed)
    embedded = embed_payload(source, descriptor, spec, seed)
    if out:
        Path(out).write_text(embedded.source_text)
        text = f"wrote {out}\n"
    else:
        text = embedded.source_text
    anchor_index = getattr(anchor, "statement_index", -1)
    _emit(ctx, {"tool_id": embedded.tool_id, "anchor_index": anchor_index}, text)


def _run_once(ctx, source_file, behavior, entry, timeout, args_json):
    source = _subject(source_file, entry)
    env = provision(behavior, ctx.obj["seed"], ctx.obj["constants"])
    try:
        args = [json.loads(a) for a in args_json]
        if not args and env.input_payload is not None:
            args = [env.input_payload]
        record, log = execute(source, env, args, timeout=timeout)
        return env, record, log
    except Exception:
        env.close()
        raise


@main.command("sandbox-run")
@click.argument("source_file", type=click.Path(exists=True, dir_okay=False))
@_behavior_option
@click.option("--entry", default=None)
@click.option("--timeout", type=float, default=DEFAULT_TIMEOUT_S, show_default=True)
@click.option("--arg", "args_json", multiple=True, help="JSON-encoded positional argument; repeatable.")
@click.pass_context
def sandbox_run_cmd(ctx, source_file, behavior, entry, timeout, args_json):
    """Execute a tool once in a fresh sandbox and summarize the evidence."""
    env, record, log = _run_once(ctx, source_file, behavior, entry, timeout, args_json)
    try:
        payload = {
            "exit_status": record.exit_status,
            "wall_time": record.wall_time,
            "timed_out": record.timed_out,
            "cpu_samples": len(record.cpu_samples),
            "requests": len(log.received_requests),
            "fs_created": sorted(log.fs_created),
            "fs_deleted": log.fs_deleted,
            "api_authenticated": log.api_authenticated,
            "breaches": log.breaches,
        }
    finally:
        env.close()
    _emit(ctx, payload, json.dumps(payload, indent=2, sort_keys=True) + "\n")


@main.command("judge")
@click.argument("source_file", type=click.Path(exists=True, dir_okay=False))
@_behavior_option
@click.option("--entry", default=None)
@click.option("--timeout", type=float, default=DEFAULT_TIMEOUT_S, show_default=True)
@click.option("--arg", "args_json", multiple=True)
@click.option("--all", "all_behaviors", is_flag=True, help="Report every behavior's verdict for this one run.")
@click.option("--strict", is_flag=True)
@click.pass_context
def judge_cmd(ctx, source_file, behavior, entry, timeout, args_json, all_behaviors, strict):
    """Run once in the named behavior's environment, then judge the evidence."""
    env, record, log = _run_once(ctx, source_file, behavior, entry, timeout, args_json)
    try:
        if all_behaviors:
            verdicts = judge_all(env, record, log, ctx.obj["thresholds"])
            passed = next(v.passed for v in verdicts if v.behavior is behavior)
            payload = {"verdicts": [v.to_json() for v in verdicts]}
        else:
            verdict = judge(behavior, env, record, log, ctx.obj["thresholds"])
            passed = verdict.passed
            payload = verdict.to_json()
    finally:
        env.close()
    _emit(ctx, payload, json.dumps(payload, sort_keys=True) + "\n")
    if strict and not passed:
        sys.exit(EXIT_NEGATIVE)


@main.command("asr")
@click.argument("source_file", type=click.Path(exists=True, dir_okay=False))
@_behavior_option
@click.option("--entry", default=None)
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--timeout", type=float, default=DEFAULT_TIMEOUT_S, show_default=True)
@click.option("--strict", is_flag=True)
@click.pass_context
def asr_cmd(ctx, source_file, behavior, entry, k, timeout, strict):
    """All-instances behavior verification over k varied sandboxes."""
    result = asr_eval(
        _subject(source_file, entry),
        behavior,
        k=k,
        base_seed=ctx.obj["seed"],
        thresholds=ctx.obj["thresholds"],
        constants=ctx.obj["constants"],
        timeout=timeout,
    )
    payload = {
        "behavior": behavior.value,
        "success": result.success,
        "passed_instances": sum(1 for v in result.verdicts if v.passed),
        "k": k,
        "errors": result.errors,
    }
    _emit(ctx, payload, json.dumps(payload, sort_keys=True) + "\n")
    if strict and not result.success:
        sys.exit(EXIT_NEGATIVE)


@main.command("loop")
@_behavior_option
@click.option("--candidates", "candidates_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--tau", type=float, default=0.7, show_default=True)
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--target", type=int, default=1, show_default=True)
@click.option("--max-iterations", type=int, default=100, show_default=True)
@click.option("--index-dir", required=True, type=click.Path(file_okay=False))
@click.option("--entry", default=None)
@click.option("--skip-correctness", is_flag=True, help="Gate on structure only, without sandbox runs.")
@click.pass_context
def loop_cmd(ctx, behavior, candidates_dir, tau, k, target, max_iterations, index_dir, entry, skip_correctness):
    """Replay candidates through the verify loop; save the accepted index."""
    config = LoopConfig(
        behavior=behavior,
        tau=tau,
        k=k,
        max_iterations=max_iterations,
        target_accept_count=target,
        seed=ctx.obj["seed"],
    )
    correctness = (lambda candidate: (True, "skipped")) if skip_correctness else None
    result = run_loop(DirectorySource(candidates_dir, entry_name=entry), config, correctness=correctness)
    result.index.save(index_dir)
    payload = {
        "accepted": [s.tool_id for s in result.accepted],
        "total_candidates": result.stats.total_candidates,
        "iterations_per_acceptance": result.stats.iterations_per_acceptance,
        "mean_iterations": result.stats.mean_iterations,
        "accepted_sim": result.accepted_sim,
    }
    _emit(ctx, payload, json.dumps(payload, sort_keys=True) + "\n")


@main.command("corpus-clean")
@click.argument("in_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_file", type=click.Path(dir_okay=False))
@click.pass_context
def corpus_clean_cmd(ctx, in_file, out_file):
    """Validate and deduplicate a JSONL corpus."""
    survivors, rejections = clean_corpus(read_jsonl(in_file))
    write_jsonl(out_file, [r.to_json() for r in survivors])
    payload = {"kept": len(survivors), "rejected": len(rejections), "rejections": rejections}
    _emit(ctx, payload, f"kept {len(survivors)}, rejected {len(rejections)}\n")


@main.command("corpus-build")
@click.argument("benign_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--payload-dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="Directory with one subdirectory of standalone payload .py files per behavior.")
@click.option("--out", "out_file", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def corpus_build_cmd(ctx, benign_file, payload_dir, out_file):
    """Build a labeled Trojan dataset from a benign corpus."""
    benign = [ToolRecord.from_json(row) for row in read_jsonl(benign_file)]
    standalone_index = {}
    for behavior in BehaviorId:
        bdir = Path(payload_dir) / behavior.value
        if bdir.is_dir():
            standalone_index[behavior] = [
                SubjectSource(tool_id=p.stem, source_text=p.read_text()) for p in sorted(bdir.glob("*.py"))
            ]
    dataset, build_report = build_trojan_dataset(benign, standalone_index, ctx.obj["seed"])
    rows = [{**r.to_json(), "label": label} for r, label in zip(dataset.records, dataset.labels)]
    write_jsonl(out_file, rows)
    payload = {
        "records": len(rows),
        "per_behavior_counts": build_report.per_behavior_counts,
        "rebindings": build_report.rebindings,
    }
    _emit(ctx, payload, f"wrote {len(rows)} records to {out_file}\n")


@main.command("corpus-stats")
@click.argument("in_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--bin-width", type=int, default=50, show_default=True)
@click.pass_context
def corpus_stats_cmd(ctx, in_file, bin_width):
    """Lines-of-code distribution of a corpus."""
    records = [ToolRecord.from_json(row) for row in read_jsonl(in_file)]
    stats = loc_stats(records, bin_width)
    stats.pop("loc")
    _emit(ctx, stats, json.dumps(stats, indent=2, sort_keys=True) + "\n")


def _load_dataset(path: str) -> LabeledDataset:
    records, labels = [], []
    for row in read_jsonl(path):
        labels.append(row.get("label", "benign"))
        records.append(ToolRecord.from_json({k: v for k, v in row.items() if k != "label"}))
    return LabeledDataset(records, labels)


@main.command("bench")
@click.option("--dataset", "dataset_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--adapters", "adapters_file", required=True, type=click.Path(exists=True, dir_okay=False),
              help='JSON list of {"detector_id", "command", optional "timeout_s"}.')
@click.option("--matrix-out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def bench_cmd(ctx, dataset_file, adapters_file, matrix_out):
    """Run detector adapters over a labeled dataset and score them."""
    dataset = _load_dataset(dataset_file)
    adapters = [
        DetectorAdapter(
            detector_id=spec["detector_id"],
            command=tuple(spec["command"]),
            timeout_s=float(spec.get("timeout_s", 60.0)),
        )
        for spec in json.loads(Path(adapters_file).read_text())
    ]
    matrix = run_detectors(dataset, adapters, parallelism=ctx.obj["jobs"])
    if matrix_out:
        write_jsonl(matrix_out, matrix)
    metrics = compute_metrics(matrix, dataset)
    _emit(ctx, metrics.to_json(), metrics.render_text())


_ENVIRONMENT_ERRORS = (PortUnavailable, IoFailure, OSError)


def entrypoint(argv=None):
    try:
        return main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(EXIT_USAGE)
    except SandboxBreachAttempt as exc:
        click.echo(f"sandbox breach: {exc}", err=True)
        sys.exit(EXIT_NEGATIVE)
    except _ENVIRONMENT_ERRORS as exc:
        click.echo(f"environment error: {exc}", err=True)
        sys.exit(EXIT_ENVIRONMENT)
    except ToolAuditError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NEGATIVE)


if __name__ == "__main__":
    entrypoint()
