"""Exception types shared across the workbench."""
from __future__ import annotations


class ToolAuditError(Exception):
    """Base class for all workbench errors."""


class NoEntryFound(ToolAuditError):
    """No function in the source carries the entry marker."""


class AmbiguousEntry(ToolAuditError):
    """Multiple marked functions and no entry name to disambiguate."""


class BindingError(ToolAuditError):
    """Payload requested parameter reuse but the entry has no parameters."""


class TooFewElements(ToolAuditError):
    """A pairwise statistic needs at least two elements."""


class PortUnavailable(ToolAuditError):
    """A requested fixture port could not be bound."""


class IoFailure(ToolAuditError):
    """Fixture provisioning hit a filesystem error."""


class SandboxBreachAttempt(ToolAuditError):
    """A tool attempted to escape its sandbox (non-loopback connection or
    a write outside the temp root). The run is aborted and flagged."""

    def __init__(self, message: str, record=None, log=None):
        super().__init__(message)
        self.record = record
        self.log = log


class GpuUnsupported(ToolAuditError):
    """No accelerator present; GPU-behavior judgement is unavailable."""


class EvidenceMismatch(ToolAuditError):
    """A side-effect log was paired with an environment it did not come from."""


class SourceExhausted(ToolAuditError):
    """The candidate stream ran out before the loop reached its target."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class MalformedRecord(ToolAuditError):
    """A corpus record violates the JSONL schema."""


class CoverageGap(ToolAuditError):
    """A verdict matrix is missing (record, detector) cells."""
