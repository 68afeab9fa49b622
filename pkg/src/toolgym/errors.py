"""Exception hierarchy shared across the pipeline.

Grouping: DataError covers malformed records and unsatisfiable augmentation
inputs; BackendError covers anything that went wrong talking to an LLM
backend. The CLI maps these groups onto its exit codes.
"""

from __future__ import annotations


class ToolGymError(Exception):
    """Base class for all package errors."""


class DataError(ToolGymError):
    """Malformed or unusable data (records, plans, fixtures)."""


class ParseError(DataError):
    """A dataset line or transcript could not be parsed.

    The message names the first malformed field.
    """


class InvariantViolation(DataError):
    """A domain-type invariant failed at construction time."""


class PreservationError(DataError):
    """An augmented record broke an oracle-preservation guarantee."""


class EmptyPool(DataError):
    """Sampling was attempted from a seed pool with no members."""


class EmptyCatalog(DataError):
    """A diversity catalog dimension has no entries."""


class BudgetExhausted(ToolGymError):
    """max_rounds was reached before the pool hit its target size."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class InsufficientDistractors(DataError):
    """The distractor source could not supply enough non-colliding specs."""


class RewriteFailed(ToolGymError):
    """Every rewrite attempt failed the consistency check."""


class WrongContentInapplicable(DataError):
    """The oracle output has no numeric or named-entity payload to perturb."""


class MissingParamsInapplicable(DataError):
    """No required parameter's information can be removed from the query."""


class BackendError(ToolGymError):
    """Base class for LLM-backend failures."""


class BackendUnavailable(BackendError):
    """The backend kept failing after the configured number of attempts."""


class BackendTimeout(BackendError):
    """A single backend request timed out."""


class MissingScript(BackendError):
    """A scripted backend was asked for a response it has no script for."""


class UnparseableVerdict(BackendError):
    """A judge reply contained neither ACCEPT nor REJECT."""


class JudgeUnavailable(BackendError):
    """The judge backend failed after retries; the sample is quarantined."""


class GeneratorUnavailable(BackendError):
    """The generator backend failed after retries."""


class UnknownInstance(DataError):
    """reset() was called with an instance id not in the loaded dataset."""


class SessionClosed(ToolGymError):
    """step() was called on a finished or expired episode."""


class EpisodeStillActive(ToolGymError):
    """finish() was called before the episode reached a terminal status."""
