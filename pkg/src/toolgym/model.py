"""Shared domain types: tools, instances, trajectories, labels, signatures.

Every type here is an immutable value after construction, so instances can be
shared freely across worker threads. Deep schema checking (does an argument
value satisfy its parameter spec?) lives in the validation module; this module
only enforces structural invariants that need no cross-module machinery.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Iterable, Mapping, Union

from .errors import InvariantViolation, ParseError


class ParamKind(str, Enum):
    STRING = "string"
    INTEGER = "integer"
    FLOAT = "float"
    BOOLEAN = "boolean"
    ARRAY = "array"
    OBJECT = "object"


# The prompt schema dialect writes nested objects as "dict"; accept it on
# input, keep "object" as the canonical spelling.
_KIND_ALIASES = {"dict": ParamKind.OBJECT, "number": ParamKind.FLOAT}

NUMERIC_KINDS = (ParamKind.INTEGER, ParamKind.FLOAT)


def parse_kind(raw: str) -> ParamKind:
    try:
        return ParamKind(raw)
    except ValueError:
        if raw in _KIND_ALIASES:
            return _KIND_ALIASES[raw]
        raise ParseError(f"unknown parameter kind: {raw!r}")


def value_matches_kind(value: Any, kind: ParamKind) -> bool:
    """Strict kind check: no coercion, and bool never counts as a number."""
    if kind is ParamKind.STRING:
        return isinstance(value, str)
    if kind is ParamKind.INTEGER:
        return isinstance(value, int) and not isinstance(value, bool)
    if kind is ParamKind.FLOAT:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind is ParamKind.BOOLEAN:
        return isinstance(value, bool)
    if kind is ParamKind.ARRAY:
        return isinstance(value, list)
    if kind is ParamKind.OBJECT:
        return isinstance(value, dict)
    raise AssertionError(f"unhandled kind {kind}")


@dataclass(frozen=True)
class ParamSpec:
    """One parameter of a tool schema.

    ``default=None`` means "no default"; a null default is not representable,
    which matches the JSON schemas this format mirrors.
    """

    kind: ParamKind
    description: str = ""
    required: bool = False
    enum_values: tuple | None = None
    range: tuple[float, float] | None = None
    default: Any = None

    def __post_init__(self):
        if self.enum_values is not None:
            object.__setattr__(self, "enum_values", tuple(self.enum_values))
            if not self.enum_values:
                raise InvariantViolation("enum_values must be non-empty when present")
            for v in self.enum_values:
                if not value_matches_kind(v, self.kind):
                    raise InvariantViolation(
                        f"enum value {v!r} is not of kind {self.kind.value}"
                    )
        if self.range is not None:
            lo, hi = self.range
            object.__setattr__(self, "range", (lo, hi))
            if self.kind not in NUMERIC_KINDS:
                raise InvariantViolation("range is only valid for numeric kinds")
            if not (lo <= hi):
                raise InvariantViolation(f"range requires min <= max, got {self.range}")
        if self.default is not None:
            if not value_matches_kind(self.default, self.kind):
                raise InvariantViolation(
                    f"default {self.default!r} is not of kind {self.kind.value}"
                )
            if self.enum_values is not None and self.default not in self.enum_values:
                raise InvariantViolation(f"default {self.default!r} not in enum_values")
            if self.range is not None and not (self.range[0] <= self.default <= self.range[1]):
                raise InvariantViolation(f"default {self.default!r} outside range")


@dataclass(frozen=True)
class ToolSpec:
    """A callable tool: name, human description, and parameter schema."""

    name: str
    description: str = ""
    parameters: Mapping[str, ParamSpec] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name:
            raise InvariantViolation("tool name must be non-empty")
        object.__setattr__(self, "parameters", dict(self.parameters))

    @property
    def required_params(self) -> list[str]:
        return [n for n, p in self.parameters.items() if p.required]


@dataclass(frozen=True)
class ToolCall:
    tool_name: str
    arguments: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.tool_name:
            raise InvariantViolation("tool_name must be non-empty")
        if not isinstance(self.arguments, Mapping):
            raise InvariantViolation("arguments must be a key/value mapping")
        object.__setattr__(self, "arguments", dict(self.arguments))


class CapabilityFamily(str, Enum):
    DISTRACTOR_TOOLS = "DistractorTools"
    QUERY_REWRITE = "QueryRewrite"
    MULTI_FORMAT_OUTPUT = "MultiFormatOutput"
    NOISY_OUTPUT = "NoisyOutput"
    ERRONEOUS_OUTPUT = "ErroneousOutput"
    PROBLEMATIC_QUERY = "ProblematicQuery"


class ErrorMode(str, Enum):
    FAILURE_MESSAGE = "failure_message"
    WRONG_CONTENT = "wrong_content"


class FailureType(str, Enum):
    IRRELEVANT = "irrelevant"
    NO_TOOL_NEEDED = "no_tool_needed"
    MISSING_PARAMS = "missing_params"


class Verifier(str, Enum):
    EXACT = "Exact"
    JUDGE_ASSISTED = "JudgeAssisted"


EXACT_FAMILIES = frozenset(
    {
        CapabilityFamily.DISTRACTOR_TOOLS,
        CapabilityFamily.QUERY_REWRITE,
        CapabilityFamily.MULTI_FORMAT_OUTPUT,
        CapabilityFamily.NOISY_OUTPUT,
    }
)

JUDGE_FAMILIES = frozenset(
    {CapabilityFamily.ERRONEOUS_OUTPUT, CapabilityFamily.PROBLEMATIC_QUERY}
)

_SUBTYPED_FAMILIES = {
    CapabilityFamily.PROBLEMATIC_QUERY: {t.value for t in FailureType},
    CapabilityFamily.ERRONEOUS_OUTPUT: {m.value for m in ErrorMode},
}


def verifier_for_family(family: CapabilityFamily) -> Verifier:
    return Verifier.EXACT if family in EXACT_FAMILIES else Verifier.JUDGE_ASSISTED


@dataclass(frozen=True)
class CapabilityLabel:
    family: CapabilityFamily
    subtype: str | None = None

    def __post_init__(self):
        allowed = _SUBTYPED_FAMILIES.get(self.family)
        if allowed is None:
            if self.subtype is not None:
                raise InvariantViolation(
                    f"family {self.family.value} does not take a subtype"
                )
        else:
            if self.subtype is None:
                raise InvariantViolation(f"family {self.family.value} requires a subtype")
            if self.subtype not in allowed:
                raise InvariantViolation(
                    f"invalid subtype {self.subtype!r} for {self.family.value}"
                )


@dataclass(frozen=True)
class VerifierMetadata:
    """Capability label plus the verifier type it fixes."""

    label: CapabilityLabel
    verifier: Verifier

    def __post_init__(self):
        expected = verifier_for_family(self.label.family)
        if self.verifier is not expected:
            raise InvariantViolation(
                f"family {self.label.family.value} requires verifier {expected.value}"
            )

    @classmethod
    def for_label(cls, label: CapabilityLabel) -> "VerifierMetadata":
        return cls(label=label, verifier=verifier_for_family(label.family))


class Overlap(str, Enum):
    LOW = "low"
    HIGH = "high"


class IndirectionLevel(str, Enum):
    DIRECT = "direct"
    INDIRECT = "indirect"
    COMPOSITIONAL = "compositional"


class FormatFamily(str, Enum):
    PLAIN = "plain"
    KEYED_FIELDS = "keyed_fields"
    TABULAR = "tabular"
    LOG_EMBEDDED = "log_embedded"


@dataclass(frozen=True)
class KnobSettings:
    """Controllable augmentation parameters; only the knobs relevant to the
    instance's capability family should be non-default.

    ``detail`` records operator-specific facts (which parameter was removed,
    what value was perturbed); ``system_prompt_perturbed`` flags the optional
    misleading-context variant available on every operator.
    """

    n_distractors: int = 0
    overlap: Overlap = Overlap.LOW
    indirection_level: IndirectionLevel = IndirectionLevel.DIRECT
    format_family: FormatFamily = FormatFamily.PLAIN
    noise_length: int = 0
    error_mode: ErrorMode | None = None
    failure_type: FailureType | None = None
    system_prompt_perturbed: bool = False
    detail: Mapping[str, str] | None = None

    def __post_init__(self):
        if self.n_distractors < 0:
            raise InvariantViolation("n_distractors must be >= 0")
        if self.noise_length < 0:
            raise InvariantViolation("noise_length must be >= 0")
        if self.detail is not None:
            object.__setattr__(self, "detail", dict(self.detail))


@dataclass(frozen=True)
class OracleStep:
    """One expected assistant turn: the call set (parallel if >1) and the tool
    output planned for each call, in the same order."""

    calls: tuple[ToolCall, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "calls", tuple(self.calls))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if not self.calls:
            raise InvariantViolation("oracle step needs at least one call")
        if len(self.calls) != len(self.outputs):
            raise InvariantViolation("one output per oracle call is required")


def _check_tools(tools: Iterable[ToolSpec]) -> tuple[ToolSpec, ...]:
    tools = tuple(tools)
    if not tools:
        raise InvariantViolation("instance must expose at least one tool")
    names = [t.name for t in tools]
    if len(set(names)) != len(names):
        raise InvariantViolation(f"duplicate tool names: {sorted(names)}")
    return tools


def _check_steps(steps, call, output, tool_names):
    if not steps:
        steps = (OracleStep(calls=(call,), outputs=(output,)),)
    steps = tuple(steps)
    first = steps[0]
    if first.calls[0] != call or first.outputs[0] != output:
        raise InvariantViolation(
            "oracle_steps[0] must lead with oracle_call / oracle_output"
        )
    for step in steps:
        for c in step.calls:
            if c.tool_name not in tool_names:
                raise InvariantViolation(
                    f"oracle call names unknown tool: {c.tool_name}"
                )
    return steps


@dataclass(frozen=True)
class BaseInstance:
    """A reliable base tool-use instance: prompt context, tool set, and the
    oracle call/output/answer that later reward checking relies on.

    Single-call instances leave ``oracle_steps`` empty and get a one-step plan
    derived from the oracle fields. Multi-turn or parallel-call fixtures spell
    the full plan out; step 0 must lead with the primary oracle fields.

    The first-stage generation path additionally enforces "exactly one tool";
    that rule belongs to generation, not to this type, because golden
    multi-tool transcripts are also carried as BaseInstance values.
    """

    id: str
    system_prompt: str
    user_query: str
    tools: tuple[ToolSpec, ...]
    oracle_call: ToolCall
    oracle_output: str
    oracle_answer: str
    oracle_steps: tuple[OracleStep, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise InvariantViolation("instance id must be non-empty")
        object.__setattr__(self, "tools", _check_tools(self.tools))
        names = {t.name for t in self.tools}
        steps = _check_steps(self.oracle_steps, self.oracle_call, self.oracle_output, names)
        object.__setattr__(self, "oracle_steps", steps)

    def tool(self, name: str) -> ToolSpec:
        for t in self.tools:
            if t.name == name:
                return t
        raise KeyError(name)


@dataclass(frozen=True)
class AugmentedInstance:
    """A perturbed environment around preserved oracle fields.

    ``oracle_answer`` is present exactly for exact-verifiable families;
    judge-assisted families drop it because the expected behavior differs
    from the original answer.
    """

    id: str
    base_id: str
    system_prompt: str
    user_query: str
    tools: tuple[ToolSpec, ...]
    tool_output_plan: str
    oracle_call: ToolCall
    oracle_answer: str | None
    meta: VerifierMetadata
    knobs: KnobSettings
    oracle_steps: tuple[OracleStep, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise InvariantViolation("instance id must be non-empty")
        object.__setattr__(self, "tools", _check_tools(self.tools))
        names = {t.name for t in self.tools}
        steps = _check_steps(
            self.oracle_steps, self.oracle_call, self.tool_output_plan, names
        )
        object.__setattr__(self, "oracle_steps", steps)
        if self.meta.verifier is Verifier.EXACT:
            if self.oracle_answer is None:
                raise InvariantViolation("Exact instances must carry oracle_answer")
        elif self.oracle_answer is not None:
            raise InvariantViolation("JudgeAssisted instances must not carry oracle_answer")

    def tool(self, name: str) -> ToolSpec:
        for t in self.tools:
            if t.name == name:
                return t
        raise KeyError(name)


Instance = Union[BaseInstance, AugmentedInstance]


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UserMessage:
    text: str


@dataclass(frozen=True)
class AssistantText:
    text: str


@dataclass(frozen=True)
class AssistantToolCall:
    """An assistant turn that attempts tool calls.

    ``parsed`` holds the extracted calls in document order (several for a
    parallel-call turn) and is empty when the raw text failed format checking.
    """

    raw_text: str
    parsed: tuple[ToolCall, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "parsed", tuple(self.parsed))


@dataclass(frozen=True)
class ToolResult:
    text: str


Turn = Union[UserMessage, AssistantText, AssistantToolCall, ToolResult]


@dataclass(frozen=True)
class Trajectory:
    """An ordered multi-turn transcript produced during rollout or generation."""

    turns: tuple[Turn, ...]

    def __post_init__(self):
        turns = tuple(self.turns)
        object.__setattr__(self, "turns", turns)
        for i, t in enumerate(turns):
            if isinstance(t, AssistantText) and i != len(turns) - 1:
                raise InvariantViolation(
                    "a plain assistant text turn is the final answer and must be last"
                )

    @property
    def final_answer(self) -> str | None:
        if self.turns and isinstance(self.turns[-1], AssistantText):
            return self.turns[-1].text
        return None

    def tool_call_turns(self) -> list[AssistantToolCall]:
        return [t for t in self.turns if isinstance(t, AssistantToolCall)]


# ---------------------------------------------------------------------------
# Canonical call signatures
# ---------------------------------------------------------------------------

def canonical_value(value: Any) -> str:
    """Deterministic text form: shortest-decimal numbers, trimmed strings,
    lowercase booleans, recursively canonical containers."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isfinite(value) and value == int(value):
            return str(int(value))
        return repr(value)
    if isinstance(value, str):
        return value.strip()
    if isinstance(value, list):
        return "[" + ",".join(canonical_value(v) for v in value) + "]"
    if isinstance(value, dict):
        inner = ",".join(f"{k}:{canonical_value(value[k])}" for k in sorted(value))
        return "{" + inner + "}"
    if value is None:
        return "null"
    raise TypeError(f"unsupported argument literal: {type(value).__name__}")


def canonical_call_signature(call: ToolCall) -> str:
    """Signature used for dedup and oracle comparison: invariant under
    argument-key order and numeric reformatting."""
    parts = [call.tool_name]
    for key in sorted(call.arguments):
        parts.append(f"{key}={canonical_value(call.arguments[key])}")
    return "|".join(parts)


# ---------------------------------------------------------------------------
# Dataset line format (one self-describing JSON object per line)
# ---------------------------------------------------------------------------

def _param_to_record(p: ParamSpec) -> dict:
    rec: dict[str, Any] = {"kind": p.kind.value, "description": p.description,
                           "required": p.required}
    if p.enum_values is not None:
        rec["enum_values"] = list(p.enum_values)
    if p.range is not None:
        rec["range"] = list(p.range)
    if p.default is not None:
        rec["default"] = p.default
    return rec


def _param_from_record(rec: Any, where: str) -> ParamSpec:
    if not isinstance(rec, dict) or "kind" not in rec:
        raise ParseError(f"malformed field: {where}.kind")
    rng = rec.get("range")
    try:
        return ParamSpec(
            kind=parse_kind(rec["kind"]),
            description=rec.get("description", ""),
            required=bool(rec.get("required", False)),
            enum_values=tuple(rec["enum_values"]) if rec.get("enum_values") is not None else None,
            range=(rng[0], rng[1]) if rng is not None else None,
            default=rec.get("default"),
        )
    except (InvariantViolation, ParseError, TypeError, IndexError) as exc:
        raise ParseError(f"malformed field: {where} ({exc})") from exc


def _tool_to_record(t: ToolSpec) -> dict:
    return {
        "name": t.name,
        "description": t.description,
        "parameters": {n: _param_to_record(p) for n, p in t.parameters.items()},
    }


def _tool_from_record(rec: Any, where: str) -> ToolSpec:
    if not isinstance(rec, dict) or not rec.get("name"):
        raise ParseError(f"malformed field: {where}.name")
    params = rec.get("parameters", {})
    if not isinstance(params, dict):
        raise ParseError(f"malformed field: {where}.parameters")
    return ToolSpec(
        name=rec["name"],
        description=rec.get("description", ""),
        parameters={
            n: _param_from_record(p, f"{where}.parameters.{n}") for n, p in params.items()
        },
    )


def _call_to_record(c: ToolCall) -> dict:
    return {"tool_name": c.tool_name, "arguments": dict(c.arguments)}


def _call_from_record(rec: Any, where: str) -> ToolCall:
    if not isinstance(rec, dict) or not rec.get("tool_name"):
        raise ParseError(f"malformed field: {where}.tool_name")
    args = rec.get("arguments", {})
    if not isinstance(args, dict):
        raise ParseError(f"malformed field: {where}.arguments")
    return ToolCall(tool_name=rec["tool_name"], arguments=args)


def _steps_to_record(inst: Instance) -> list[dict] | None:
    steps = inst.oracle_steps
    if len(steps) == 1 and len(steps[0].calls) == 1:
        return None
    return [
        {"calls": [_call_to_record(c) for c in s.calls], "outputs": list(s.outputs)}
        for s in steps
    ]


def _steps_from_record(raw: Any) -> tuple[OracleStep, ...]:
    steps = []
    for i, rec in enumerate(raw):
        where = f"oracle_steps[{i}]"
        if not isinstance(rec, dict) or "calls" not in rec or "outputs" not in rec:
            raise ParseError(f"malformed field: {where}")
        calls = tuple(
            _call_from_record(c, f"{where}.calls[{j}]") for j, c in enumerate(rec["calls"])
        )
        outputs = tuple(str(o) for o in rec["outputs"])
        try:
            steps.append(OracleStep(calls=calls, outputs=outputs))
        except InvariantViolation as exc:
            raise ParseError(f"malformed field: {where} ({exc})") from exc
    return tuple(steps)


_KNOB_DEFAULTS = KnobSettings()


def _knobs_to_record(k: KnobSettings) -> dict:
    rec: dict[str, Any] = {}
    for f in fields(KnobSettings):
        value = getattr(k, f.name)
        if value == getattr(_KNOB_DEFAULTS, f.name):
            continue
        if isinstance(value, Enum):
            value = value.value
        elif isinstance(value, Mapping):
            value = dict(value)
        rec[f.name] = value
    return rec


def _knobs_from_record(rec: Any) -> KnobSettings:
    if rec is None:
        return KnobSettings()
    if not isinstance(rec, dict):
        raise ParseError("malformed field: knobs")
    kwargs: dict[str, Any] = {}
    try:
        for name, enum_cls in (
            ("overlap", Overlap),
            ("indirection_level", IndirectionLevel),
            ("format_family", FormatFamily),
            ("error_mode", ErrorMode),
            ("failure_type", FailureType),
        ):
            if rec.get(name) is not None:
                kwargs[name] = enum_cls(rec[name])
        for name in ("n_distractors", "noise_length"):
            if name in rec:
                kwargs[name] = int(rec[name])
        if "system_prompt_perturbed" in rec:
            kwargs["system_prompt_perturbed"] = bool(rec["system_prompt_perturbed"])
        if rec.get("detail") is not None:
            kwargs["detail"] = dict(rec["detail"])
        return KnobSettings(**kwargs)
    except (ValueError, TypeError, InvariantViolation) as exc:
        raise ParseError(f"malformed field: knobs ({exc})") from exc


def _meta_to_record(m: VerifierMetadata) -> dict:
    label: dict[str, Any] = {"family": m.label.family.value}
    if m.label.subtype is not None:
        label["subtype"] = m.label.subtype
    return {"label": label, "verifier": m.verifier.value}


def _meta_from_record(rec: Any) -> VerifierMetadata:
    if not isinstance(rec, dict) or "label" not in rec or "verifier" not in rec:
        raise ParseError("malformed field: meta")
    label = rec["label"]
    if not isinstance(label, dict) or "family" not in label:
        raise ParseError("malformed field: meta.label.family")
    try:
        return VerifierMetadata(
            label=CapabilityLabel(
                family=CapabilityFamily(label["family"]), subtype=label.get("subtype")
            ),
            verifier=Verifier(rec["verifier"]),
        )
    except (ValueError, InvariantViolation) as exc:
        raise ParseError(f"malformed field: meta ({exc})") from exc


def serialize_instance(inst: Instance) -> str:
    """One dataset line per record; fields appear in a fixed order so output
    files are byte-stable."""
    rec: dict[str, Any] = {}
    if isinstance(inst, BaseInstance):
        rec["record_type"] = "base"
        rec["id"] = inst.id
        rec["system_prompt"] = inst.system_prompt
        rec["user_query"] = inst.user_query
        rec["tools"] = [_tool_to_record(t) for t in inst.tools]
        rec["oracle_call"] = _call_to_record(inst.oracle_call)
        rec["oracle_output"] = inst.oracle_output
        rec["oracle_answer"] = inst.oracle_answer
    elif isinstance(inst, AugmentedInstance):
        rec["record_type"] = "augmented"
        rec["id"] = inst.id
        rec["base_id"] = inst.base_id
        rec["system_prompt"] = inst.system_prompt
        rec["user_query"] = inst.user_query
        rec["tools"] = [_tool_to_record(t) for t in inst.tools]
        rec["tool_output_plan"] = inst.tool_output_plan
        rec["oracle_call"] = _call_to_record(inst.oracle_call)
        if inst.oracle_answer is not None:
            rec["oracle_answer"] = inst.oracle_answer
        rec["meta"] = _meta_to_record(inst.meta)
        rec["knobs"] = _knobs_to_record(inst.knobs)
    else:
        raise TypeError(f"not an instance: {type(inst).__name__}")
    steps = _steps_to_record(inst)
    if steps is not None:
        rec["oracle_steps"] = steps
    return json.dumps(rec, ensure_ascii=False)


def _require(rec: dict, name: str, line_kind: str) -> Any:
    if name not in rec:
        raise ParseError(f"{line_kind} record missing field: {name}")
    return rec[name]


def parse_instance(line: str) -> Instance:
    """Inverse of serialize_instance; fails naming the first malformed field."""
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line is not valid JSON: {exc}") from exc
    if not isinstance(rec, dict):
        raise ParseError("record must be a JSON object")
    kind = rec.get("record_type")
    if kind not in ("base", "augmented"):
        raise ParseError("record missing field: record_type")

    tools = tuple(
        _tool_from_record(t, f"tools[{i}]")
        for i, t in enumerate(_require(rec, "tools", kind))
    )
    call = _call_from_record(_require(rec, "oracle_call", kind), "oracle_call")
    steps = _steps_from_record(rec["oracle_steps"]) if "oracle_steps" in rec else ()

    try:
        if kind == "base":
            return BaseInstance(
                id=str(_require(rec, "id", kind)),
                system_prompt=str(_require(rec, "system_prompt", kind)),
                user_query=str(_require(rec, "user_query", kind)),
                tools=tools,
                oracle_call=call,
                oracle_output=str(_require(rec, "oracle_output", kind)),
                oracle_answer=str(_require(rec, "oracle_answer", kind)),
                oracle_steps=steps,
            )
        meta = _meta_from_record(_require(rec, "meta", kind))
        answer = rec.get("oracle_answer")
        return AugmentedInstance(
            id=str(_require(rec, "id", kind)),
            base_id=str(_require(rec, "base_id", kind)),
            system_prompt=str(_require(rec, "system_prompt", kind)),
            user_query=str(_require(rec, "user_query", kind)),
            tools=tools,
            tool_output_plan=str(_require(rec, "tool_output_plan", kind)),
            oracle_call=call,
            oracle_answer=str(answer) if answer is not None else None,
            meta=meta,
            knobs=_knobs_from_record(rec.get("knobs")),
            oracle_steps=steps,
        )
    except InvariantViolation as exc:
        raise ParseError(f"invalid {kind} record: {exc}") from exc
