"""Exception hierarchy shared across the harness.

Every domain failure derives from HilbenchError so the CLI can map it to
exit code 1; anything else escaping is a bug.
"""

from __future__ import annotations


class HilbenchError(Exception):
    """Base class for all domain errors raised by this package."""


# --- skill library ---------------------------------------------------------


class SkillParseError(HilbenchError):
    """A skill file could not be parsed."""

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path


class MissingFrontmatter(SkillParseError):
    pass


class MalformedHeader(SkillParseError):
    pass


class MissingRequiredField(SkillParseError):
    pass


class EmptyBody(SkillParseError):
    pass


class LibraryError(HilbenchError):
    """A skill library violates its structural invariants."""


class UnknownSkillName(HilbenchError):
    """A requested skill name matched nothing, even after normalization."""


class UnparseableGeneration(HilbenchError):
    """A generation response contained no recognizable skill documents."""


# --- task corpus -----------------------------------------------------------


class SchemaError(HilbenchError):
    """A task file failed validation."""

    def __init__(self, message: str, path: str | None = None, field: str | None = None):
        loc = " ".join(p for p in (path, f"field '{field}'" if field else None) if p)
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.field = field


class UnknownPeripheral(SchemaError):
    pass


class PinConventionMismatch(SchemaError):
    pass


class PlatformMismatch(HilbenchError):
    """Task and platform profile disagree."""


# --- providers / pipeline --------------------------------------------------


class ProviderError(HilbenchError):
    """The model provider failed."""


class TransientProviderError(ProviderError):
    """Retryable infrastructure failure (timeouts, 5xx, connection loss)."""


class ReplayMiss(ProviderError):
    """Replay provider has no cassette for the request."""


# --- assembler -------------------------------------------------------------


class AssemblyError(HilbenchError):
    """Raw model output could not be packaged into a project."""


class NoCodeFound(AssemblyError):
    pass


class UnsupportedPlatform(AssemblyError):
    pass


class InvalidDescriptor(AssemblyError):
    pass


# --- toolchain -------------------------------------------------------------


class WorkspaceError(HilbenchError):
    """Workspace I/O failed while materializing or building a bundle."""


class ProfileMismatch(HilbenchError):
    """Bundle platform does not match the toolchain profile."""


class PortUnavailable(HilbenchError):
    """Serial port missing or unopenable; the attempt is incomplete, not BF."""


# --- evaluation harness ----------------------------------------------------


class InconsistentInputs(HilbenchError):
    """Verdict supplied for an attempt that never flashed (or vice versa)."""


class JournalCorruption(HilbenchError):
    """Journal contains an undecodable record before the final line."""


class MissingEntry(HilbenchError):
    """Scripted verdict source has no entry for the attempt."""


class PortInUse(HilbenchError):
    """Control API could not bind its port."""


class PlanError(HilbenchError):
    """Campaign plan failed validation."""


# --- metrics ---------------------------------------------------------------


class MetricsError(HilbenchError):
    pass


class InsufficientAttempts(MetricsError):
    """An instance has fewer complete attempts than the requested k."""

    def __init__(self, message: str, instances: list | None = None):
        super().__init__(message)
        self.instances = instances or []


class EmptyGroup(MetricsError):
    """A rate was requested for a group with no instances."""


class UnsupportedFormat(MetricsError):
    pass
