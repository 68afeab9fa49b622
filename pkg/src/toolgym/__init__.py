"""toolgym: verifiable tool-use training environments.

Two-stage data synthesis (validated base trajectories, then oracle-preserving
augmentation) plus the reward functions and mock rollout environment an RL
trainer plugs into.
"""

from .model import (
    AugmentedInstance,
    BaseInstance,
    CapabilityFamily,
    CapabilityLabel,
    ErrorMode,
    FailureType,
    FormatFamily,
    IndirectionLevel,
    KnobSettings,
    OracleStep,
    Overlap,
    ParamKind,
    ParamSpec,
    ToolCall,
    ToolSpec,
    Trajectory,
    Verifier,
    VerifierMetadata,
    canonical_call_signature,
    parse_instance,
    serialize_instance,
)
from .reward import RewardBreakdown, RewardWeights, match_answer, match_call, score
from .validation import CheckReport, Stage, check_format, check_rules, validate_full
from .environment import EnvConfig, EpisodeStatus, MockToolEnvironment

__version__ = "0.1.0"

__all__ = [
    "AugmentedInstance",
    "BaseInstance",
    "CapabilityFamily",
    "CapabilityLabel",
    "CheckReport",
    "EnvConfig",
    "EpisodeStatus",
    "ErrorMode",
    "FailureType",
    "FormatFamily",
    "IndirectionLevel",
    "KnobSettings",
    "MockToolEnvironment",
    "OracleStep",
    "Overlap",
    "ParamKind",
    "ParamSpec",
    "RewardBreakdown",
    "RewardWeights",
    "Stage",
    "ToolCall",
    "ToolSpec",
    "Trajectory",
    "Verifier",
    "VerifierMetadata",
    "canonical_call_signature",
    "check_format",
    "check_rules",
    "match_answer",
    "match_call",
    "parse_instance",
    "score",
    "serialize_instance",
    "validate_full",
    "__version__",
]
