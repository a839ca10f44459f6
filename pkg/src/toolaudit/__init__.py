"""Defensive analysis workbench for agent tool ecosystems.

Structural fingerprinting and similarity gating of tool source code,
sandboxed execution with behavior oracles across a twelve-behavior
taxonomy, a generate-verify loop over pluggable candidate sources, and
corpus construction plus external-detector benchmarking.
"""
from .behaviors import ALL_BEHAVIORS, BehaviorId
from .embedding import (
    Binding,
    FunctionStart,
    MustExecuteRegion,
    PayloadSpec,
    StatementLocus,
    choose_insertion_point,
    embed_payload,
    must_execute_region,
)
from .errors import (
    AmbiguousEntry,
    BindingError,
    CoverageGap,
    EvidenceMismatch,
    GpuUnsupported,
    IoFailure,
    MalformedRecord,
    NoEntryFound,
    PortUnavailable,
    SandboxBreachAttempt,
    SourceExhausted,
    TooFewElements,
    ToolAuditError,
)
from .fingerprint import (
    EntryDescriptor,
    FingerprintConfig,
    ShapeMultiset,
    SubjectSource,
    SubtreeShape,
    fingerprint,
    locate_entry,
)
from .loop import (
    CandidateSource,
    DirectorySource,
    Feedback,
    LoopConfig,
    LoopResult,
    LoopStats,
    RejectionKind,
    ScriptedSource,
    run_loop,
)
from .oracles import AsrResult, OracleThresholds, Verdict, asr_eval, judge, judge_all
from .sandbox import (
    ExecutionRecord,
    FixtureConstants,
    FixtureEnvironment,
    SideEffectLog,
    canonical_payload_bytes,
    execute,
    make_instances,
    provision,
)
from .similarity import (
    CorpusIndex,
    GateDecision,
    diversity_gate,
    jaccard,
    jaccard_exact,
    mean_pairwise_sim,
    nearest,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_BEHAVIORS",
    "AmbiguousEntry",
    "AsrResult",
    "BehaviorId",
    "Binding",
    "BindingError",
    "CandidateSource",
    "CorpusIndex",
    "CoverageGap",
    "DirectorySource",
    "EntryDescriptor",
    "EvidenceMismatch",
    "ExecutionRecord",
    "Feedback",
    "FingerprintConfig",
    "FixtureConstants",
    "FixtureEnvironment",
    "FunctionStart",
    "GateDecision",
    "GpuUnsupported",
    "IoFailure",
    "LoopConfig",
    "LoopResult",
    "LoopStats",
    "MalformedRecord",
    "MustExecuteRegion",
    "NoEntryFound",
    "OracleThresholds",
    "PayloadSpec",
    "PortUnavailable",
    "RejectionKind",
    "SandboxBreachAttempt",
    "ScriptedSource",
    "ShapeMultiset",
    "SideEffectLog",
    "SourceExhausted",
    "StatementLocus",
    "SubjectSource",
    "SubtreeShape",
    "TooFewElements",
    "ToolAuditError",
    "Verdict",
    "asr_eval",
    "canonical_payload_bytes",
    "choose_insertion_point",
    "diversity_gate",
    "embed_payload",
    "execute",
    "fingerprint",
    "jaccard",
    "jaccard_exact",
    "judge",
    "judge_all",
    "locate_entry",
    "make_instances",
    "mean_pairwise_sim",
    "must_execute_region",
    "nearest",
    "provision",
    "run_loop",
]
