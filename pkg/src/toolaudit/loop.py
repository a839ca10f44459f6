"""Generate-verify orchestration with a pluggable candidate source.

Candidates stream in from a directory replay or a scripted list (no
generation logic lives here). Each candidate is fingerprinted, checked
for behavioral correctness over k sandbox instances, then passed through
the structural-diversity gate against previously accepted tools.
Rejections produce structured feedback for the next candidate request.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Protocol

from .behaviors import BehaviorId
from .errors import SourceExhausted
from .fingerprint import FingerprintConfig, ShapeMultiset, SubjectSource, fingerprint
from .oracles import asr_eval
from .similarity import CorpusIndex, GateDecision, diversity_gate, mean_pairwise_sim


class RejectionKind(Enum):
    CORRECTNESS_FAIL = "correctness_fail"
    DIVERSITY_FAIL = "diversity_fail"


@dataclass(frozen=True)
class Feedback:
    """Structured rejection feedback handed back to the candidate source."""

    rejection_kind: RejectionKind
    message: str
    similarity: float | None = None
    nearest_source: str | None = None


class CandidateSource(Protocol):
    """Stream contract: each call may observe the previous rejection and
    the current accepted references; returns None when exhausted."""

    def next(
        self, feedback: Feedback | None, references: list[SubjectSource]
    ) -> SubjectSource | None: ...


class ScriptedSource:
    """Replays a fixed list of candidates, recording the feedback it saw."""

    def __init__(self, candidates: list[SubjectSource]):
        self._candidates = list(candidates)
        self._pos = 0
        self.feedback_seen: list[Feedback | None] = []

    def next(self, feedback, references):
        self.feedback_seen.append(feedback)
        if self._pos >= len(self._candidates):
            return None
        candidate = self._candidates[self._pos]
        self._pos += 1
        return candidate


class DirectorySource:
    """Replays pre-existing candidate files from a directory, in name order."""

    def __init__(self, directory: str | Path, entry_name: str | None = None):
        self._paths = sorted(Path(directory).glob("*.py"))
        self._pos = 0
        self._entry_name = entry_name

    def next(self, feedback, references):
        if self._pos >= len(self._paths):
            return None
        path = self._paths[self._pos]
        self._pos += 1
        return SubjectSource(
            tool_id=path.stem, source_text=path.read_text(), entry_name=self._entry_name
        )


@dataclass(frozen=True)
class LoopConfig:
    """Loop parameters; defaults follow the canonical configuration."""

    behavior: BehaviorId
    tau: float = 0.7
    k: int = 10
    max_iterations: int = 100
    target_accept_count: int = 1
    recent_refs: int = 10
    sampled_refs: int = 40
    sample_activation: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise ValueError("tau must be in (0, 1]")
        for name in ("k", "max_iterations", "target_accept_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class LoopStats:
    iterations_per_acceptance: list[int] = field(default_factory=list)
    total_candidates: int = 0

    @property
    def mean_iterations(self) -> float:
        if not self.iterations_per_acceptance:
            return 0.0
        return sum(self.iterations_per_acceptance) / len(self.iterations_per_acceptance)


@dataclass
class LoopResult:
    accepted: list[SubjectSource]
    index: CorpusIndex
    stats: LoopStats
    accepted_sim: float | None  # mean pairwise SIM; None when < 2 accepted


def select_references(
    accepted_history: list[SubjectSource], config: LoopConfig, rng: random.Random
) -> list[SubjectSource]:
    """The most recent acceptances plus, for long histories, a seeded
    sample of older ones."""
    recent = accepted_history[-config.recent_refs :]
    refs = list(recent)
    if len(accepted_history) > config.sample_activation:
        remainder = accepted_history[: -config.recent_refs]
        n = min(config.sampled_refs, len(remainder))
        refs.extend(rng.sample(remainder, n))
    return refs


def compose_feedback(
    decision: GateDecision | None,
    nearest_source: str | None = None,
    correctness_detail: str | None = None,
) -> Feedback:
    """Render a rejection into the message the candidate source consumes.

    Diversity rejections embed the similarity (three decimals) and the
    closest accepted implementation; correctness rejections name the
    failed check.
    """
    if decision is not None:
        if decision.accepted:
            raise ValueError("compose_feedback requires a rejection")
        sim = decision.nearest_score or 0.0
        message = (
            f"Rejected: too structurally similar to an already accepted tool "
            f"(structural similarity = {sim:.3f}, threshold = {decision.threshold}).\n"
            f"Closest accepted implementation (do not imitate its structure):\n"
            f"```python\n{nearest_source or ''}\n```\n"
            f"Produce an implementation with a substantially different "
            f"control-flow skeleton and decomposition."
        )
        return Feedback(
            rejection_kind=RejectionKind.DIVERSITY_FAIL,
            message=message,
            similarity=sim,
            nearest_source=nearest_source,
        )
    message = f"Rejected: behavior verification failed ({correctness_detail})."
    return Feedback(rejection_kind=RejectionKind.CORRECTNESS_FAIL, message=message)


CorrectnessCheck = Callable[[SubjectSource], tuple[bool, str]]


def _sandbox_correctness(config: LoopConfig) -> CorrectnessCheck:
    def check(candidate: SubjectSource) -> tuple[bool, str]:
        result = asr_eval(candidate, config.behavior, k=config.k, base_seed=config.seed)
        failed = [i for i, v in enumerate(result.verdicts) if not v.passed]
        return result.success, f"failed instances: {failed}" if failed else "ok"

    return check


def run_loop(
    source: CandidateSource,
    config: LoopConfig,
    index: CorpusIndex | None = None,
    correctness: CorrectnessCheck | None = None,
    fp_config: FingerprintConfig | None = None,
) -> LoopResult:
    """Consume candidates until the target acceptance count is reached.

    Candidates that fail to parse count as one consumed iteration with
    correctness-failure feedback. Raises SourceExhausted (with partial
    results attached) when the stream ends early.
    """
    index = index if index is not None else CorpusIndex()
    correctness = correctness or _sandbox_correctness(config)
    rng = random.Random(config.seed)
    behavior = config.behavior.value

    accepted: list[SubjectSource] = []
    stats = LoopStats()
    feedback: Feedback | None = None
    iterations_this_acceptance = 0

    while len(accepted) < config.target_accept_count:
        if iterations_this_acceptance >= config.max_iterations:
            break
        references = select_references(accepted, config, rng)
        candidate = source.next(feedback, references)
        if candidate is None:
            result = _finalize(accepted, index, stats, fp_config)
            raise SourceExhausted("candidate stream exhausted", partial=result)

        stats.total_candidates += 1
        iterations_this_acceptance += 1
        feedback = None

        try:
            fp = fingerprint(candidate, fp_config)
        except SyntaxError as exc:
            feedback = compose_feedback(None, correctness_detail=f"syntax error: {exc}")
            continue

        ok, detail = correctness(candidate)
        if not ok:
            feedback = compose_feedback(None, correctness_detail=detail)
            continue

        decision = diversity_gate(fp, index, behavior, config.tau)
        if not decision.accepted:
            nearest_src = next(
                (src for tid, _, src in index.partition(behavior) if tid == decision.nearest_id),
                None,
            )
            feedback = compose_feedback(decision, nearest_source=nearest_src)
            continue

        index.insert(behavior, candidate.tool_id, fp, candidate.source_text)
        accepted.append(candidate)
        stats.iterations_per_acceptance.append(iterations_this_acceptance)
        iterations_this_acceptance = 0

    return _finalize(accepted, index, stats, fp_config)


def _finalize(accepted, index, stats, fp_config=None) -> LoopResult:
    sim = None
    if len(accepted) >= 2:
        behavior_fps = [fingerprint(src, fp_config) for src in accepted]
        sim = mean_pairwise_sim(behavior_fps)
    return LoopResult(accepted=accepted, index=index, stats=stats, accepted_sim=sim)
