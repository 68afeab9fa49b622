"""Three-level candidate checking (format, rule, semantic) plus
signature-based dedup.

check_format and check_rules are pure and total: failures come back as
reports, never exceptions. check_semantic talks to a judge backend and raises
JudgeUnavailable when the backend is exhausted, so a flaky judge quarantines
candidates instead of silently accepting or rejecting them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from . import prompts, transcript
from .backends import Backend, parse_binary_verdict
from .errors import BackendError, JudgeUnavailable, ParseError
from .model import (
    BaseInstance,
    NUMERIC_KINDS,
    ToolCall,
    ToolSpec,
    Trajectory,
    value_matches_kind,
)

if TYPE_CHECKING:
    from .generation import SeedPool


class Stage(str, Enum):
    FORMAT = "Format"
    RULE = "Rule"
    SEMANTIC = "Semantic"


@dataclass(frozen=True)
class CheckReport:
    stage: Stage
    passed: bool
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        if self.passed and self.diagnostics:
            raise ValueError("a passing report cannot carry diagnostics")


TOOL_CALL_OPEN = "<tool_call>"
TOOL_CALL_CLOSE = "</tool_call>"
_TAG_RE = re.compile(r"</?tool_call>")


def check_format(raw_assistant_text: str) -> tuple[CheckReport, list[ToolCall]]:
    """Verify tool-call tags balance and payloads are well-formed JSON calls.

    Tags other than <tool_call> are opaque text. Extracted calls come back in
    document order; on failure the parseable subset is still returned for
    diagnostics, guarded by the failing report.
    """
    diagnostics: list[str] = []
    calls: list[ToolCall] = []
    open_end: int | None = None
    for m in _TAG_RE.finditer(raw_assistant_text):
        if m.group() == TOOL_CALL_OPEN:
            if open_end is not None:
                diagnostics.append("nested tool_call tag")
            else:
                open_end = m.end()
        else:
            if open_end is None:
                diagnostics.append("unexpected closing tool_call tag")
                continue
            payload = raw_assistant_text[open_end : m.start()]
            open_end = None
            try:
                obj = json.loads(payload)
            except json.JSONDecodeError:
                diagnostics.append("invalid JSON payload")
                continue
            if not isinstance(obj, dict):
                diagnostics.append("payload must be a JSON object")
                continue
            name = obj.get("name")
            args = obj.get("arguments")
            if not isinstance(name, str) or not name:
                diagnostics.append("payload missing name field")
                continue
            if not isinstance(args, dict):
                diagnostics.append("payload arguments must be an object")
                continue
            calls.append(ToolCall(tool_name=name, arguments=args))
    if open_end is not None:
        diagnostics.append("unclosed tool_call tag")
    report = CheckReport(Stage.FORMAT, passed=not diagnostics, diagnostics=diagnostics)
    return report, calls


def check_rules(call: ToolCall, spec: ToolSpec) -> CheckReport:
    """Enforce the tool schema: required params, declared params, kinds,
    enum membership, numeric ranges. One diagnostic per violated constraint;
    values are never coerced here (the reward matcher coerces, the validator
    does not)."""
    diagnostics: list[str] = []
    if call.tool_name != spec.name:
        diagnostics.append(f"tool name mismatch: {call.tool_name} vs {spec.name}")
    for name in spec.required_params:
        if name not in call.arguments:
            diagnostics.append(f"missing required parameter: {name}")
    for name, value in call.arguments.items():
        param = spec.parameters.get(name)
        if param is None:
            diagnostics.append(f"undeclared parameter: {name}")
            continue
        if not value_matches_kind(value, param.kind):
            diagnostics.append(f"type mismatch: {name} expects {param.kind.value}")
            continue
        if param.enum_values is not None and value not in param.enum_values:
            diagnostics.append(f"enum violation: {name}")
        if param.range is not None and param.kind in NUMERIC_KINDS:
            lo, hi = param.range
            if not (lo <= value <= hi):
                diagnostics.append(f"range violation: {name}")
    return CheckReport(Stage.RULE, passed=not diagnostics, diagnostics=diagnostics)


def check_semantic(
    trajectory: Trajectory,
    instance: BaseInstance,
    judge: Backend,
    *,
    max_retries: int = 3,
    template_path: str | None = None,
) -> CheckReport:
    """Submit the full episode to the judge for a binary accept/reject.

    Backend failures and unparseable verdicts each consume one attempt; when
    all attempts are gone the candidate is quarantined via JudgeUnavailable
    rather than being scored either way.
    """
    prompt = prompts.build_semantic_prompt(
        instance.tools, instance.user_query, trajectory, template_path=template_path
    )
    last_error: Exception | None = None
    for _ in range(max_retries):
        try:
            verdict = parse_binary_verdict(judge.complete(prompt))
        except BackendError as exc:
            last_error = exc
            continue
        if verdict:
            return CheckReport(Stage.SEMANTIC, passed=True)
        return CheckReport(
            Stage.SEMANTIC, passed=False, diagnostics=("judge rejected the episode",)
        )
    raise JudgeUnavailable(
        f"judge failed {max_retries} attempts: {last_error}"
    ) from last_error


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of the full checker pipeline over one candidate."""

    instance: BaseInstance | None
    trajectory: Trajectory | None
    reports: tuple[CheckReport, ...]

    @property
    def accepted(self) -> bool:
        return self.instance is not None

    @property
    def rejection_stage(self) -> Stage | None:
        for report in self.reports:
            if not report.passed:
                return report.stage
        return None

    @property
    def diagnostics(self) -> tuple[str, ...]:
        out: list[str] = []
        for report in self.reports:
            out.extend(report.diagnostics)
        return tuple(out)


def _reject(stage: Stage, diagnostics, reports=()) -> ValidationResult:
    report = CheckReport(stage, passed=False, diagnostics=tuple(diagnostics))
    return ValidationResult(instance=None, trajectory=None, reports=(*reports, report))


def validate_full(
    candidate: str,
    *,
    judge: Backend,
    instance_id: str,
    require_single_tool: bool = False,
    max_judge_retries: int = 3,
    semantic_template: str | None = None,
) -> ValidationResult:
    """Run Format -> Rule -> Semantic over a candidate transcript,
    short-circuiting at the first failing stage. Only a candidate that passes
    all three becomes a BaseInstance."""
    try:
        parsed = transcript.parse_transcript(candidate)
    except ParseError as exc:
        return _reject(Stage.FORMAT, [str(exc)])

    format_diags: list[str] = []
    calls_per_block: list[list[ToolCall]] = []
    for raw in parsed.assistant_blocks:
        report, calls = check_format(raw)
        format_diags.extend(report.diagnostics)
        calls_per_block.append(calls)
    if TOOL_CALL_OPEN in parsed.final_answer or TOOL_CALL_CLOSE in parsed.final_answer:
        format_diags.append("final answer must not contain tool_call tags")
    if not parsed.assistant_blocks:
        format_diags.append("candidate has no tool-call turn")
    for calls, outputs in zip(calls_per_block, parsed.tool_outputs):
        if calls and len(calls) != len(outputs):
            format_diags.append("tool results do not match tool calls")
    if require_single_tool and len(parsed.tools) != 1:
        format_diags.append(f"expected exactly one tool, found {len(parsed.tools)}")
    if format_diags:
        return _reject(Stage.FORMAT, format_diags)
    format_report = CheckReport(Stage.FORMAT, passed=True)

    by_name = {t.name: t for t in parsed.tools}
    rule_diags: list[str] = []
    for calls in calls_per_block:
        for call in calls:
            spec = by_name.get(call.tool_name)
            if spec is None:
                rule_diags.append(f"unknown tool: {call.tool_name}")
                continue
            rule_diags.extend(check_rules(call, spec).diagnostics)
    if rule_diags:
        return _reject(Stage.RULE, rule_diags, reports=(format_report,))
    rule_report = CheckReport(Stage.RULE, passed=True)

    trajectory = transcript.build_trajectory(parsed, calls_per_block)
    instance = transcript.to_instance(parsed, instance_id, calls_per_block)
    semantic_report = check_semantic(
        trajectory,
        instance,
        judge,
        max_retries=max_judge_retries,
        template_path=semantic_template,
    )
    reports = (format_report, rule_report, semantic_report)
    if not semantic_report.passed:
        return ValidationResult(instance=None, trajectory=None, reports=reports)
    return ValidationResult(instance=instance, trajectory=trajectory, reports=reports)


def dedup_insert(pool: "SeedPool", instance: BaseInstance) -> bool:
    """Insert unless the pool already holds the oracle call's normalized
    signature. Pool access is serialized inside SeedPool."""
    return pool.insert(instance)
