"""Rollout reward: a trajectory-global format bit plus capability-conditioned
correctness, combined linearly.

Exact-verifiable instances are scored by normalized reference matching
against the preserved oracle call(s) and answer, turn by turn, with the mean
taken over tool-use turns. Judge-assisted instances get a single binary
verdict from the judge, counted as one terminal turn; the matcher is never
consulted for their final behavior (and the judge is never consulted for
exact instances).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from . import prompts
from .backends import Backend, parse_binary_verdict
from .errors import BackendError, InvariantViolation, JudgeUnavailable
from .model import (
    AssistantText,
    AssistantToolCall,
    AugmentedInstance,
    ParamKind,
    ToolCall,
    ToolSpec,
    Trajectory,
    Verifier,
    canonical_value,
)
from .validation import check_format, check_rules


@dataclass(frozen=True)
class RewardWeights:
    lambda_fmt: float = 0.2
    lambda_cor: float = 0.8

    def __post_init__(self):
        for name in ("lambda_fmt", "lambda_cor"):
            value = getattr(self, name)
            if not (value == value and abs(value) != float("inf")):
                raise InvariantViolation(f"{name} must be finite")
            if value < 0:
                raise InvariantViolation(f"{name} must be non-negative")
        if self.lambda_fmt + self.lambda_cor <= 0:
            raise InvariantViolation("at least one weight must be positive")


@dataclass(frozen=True)
class RewardBreakdown:
    r_fmt: int
    r_cor: float
    per_turn: tuple[int, ...]
    total: float

    def to_dict(self) -> dict:
        return {
            "r_fmt": self.r_fmt,
            "r_cor": self.r_cor,
            "per_turn": list(self.per_turn),
            "total": self.total,
        }


def _tool_map(tools: Iterable[ToolSpec]) -> dict[str, ToolSpec]:
    return {t.name: t for t in tools}


def score_format(trajectory: Trajectory, tools: Iterable[ToolSpec]) -> int:
    """1 iff every assistant turn has balanced, well-formed tool-call tags and
    every parsed call satisfies the named tool's schema."""
    by_name = _tool_map(tools)
    for turn in trajectory.turns:
        if isinstance(turn, AssistantToolCall):
            report, calls = check_format(turn.raw_text)
            if not report.passed:
                return 0
            for call in calls:
                spec = by_name.get(call.tool_name)
                if spec is None or not check_rules(call, spec).passed:
                    return 0
        elif isinstance(turn, AssistantText):
            report, _ = check_format(turn.text)
            if not report.passed:
                return 0
    return 1


# ---------------------------------------------------------------------------
# Normalized reference matching
# ---------------------------------------------------------------------------

class _NoMatch(Exception):
    pass


_TRUTHY = {"true"}
_FALSY = {"false"}


def coerce_to_kind(value: Any, kind: ParamKind) -> Any:
    """Coerce a supplied literal to the schema's declared kind for match-time
    comparison. Raises _NoMatch when the value cannot represent the kind."""
    if kind is ParamKind.STRING:
        if isinstance(value, str):
            return value.strip()
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (int, float)):
            return canonical_value(value)
        raise _NoMatch
    if kind is ParamKind.INTEGER:
        if isinstance(value, bool):
            raise _NoMatch
        if isinstance(value, int):
            return value
        if isinstance(value, float):
            if value == int(value):
                return int(value)
            raise _NoMatch
        if isinstance(value, str):
            try:
                number = float(value.strip())
            except ValueError:
                raise _NoMatch from None
            if number == int(number):
                return int(number)
            raise _NoMatch
        raise _NoMatch
    if kind is ParamKind.FLOAT:
        if isinstance(value, bool):
            raise _NoMatch
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            try:
                return float(value.strip())
            except ValueError:
                raise _NoMatch from None
        raise _NoMatch
    if kind is ParamKind.BOOLEAN:
        if isinstance(value, bool):
            return value
        if isinstance(value, str):
            lowered = value.strip().lower()
            if lowered in _TRUTHY:
                return True
            if lowered in _FALSY:
                return False
            raise _NoMatch
        if isinstance(value, (int, float)):
            if value == 1:
                return True
            if value == 0:
                return False
            raise _NoMatch
        raise _NoMatch
    if kind is ParamKind.ARRAY:
        if isinstance(value, list):
            return [canonical_value(v) for v in value]
        raise _NoMatch
    if kind is ParamKind.OBJECT:
        if isinstance(value, dict):
            return {k: canonical_value(v) for k, v in sorted(value.items())}
        raise _NoMatch
    raise AssertionError(f"unhandled kind {kind}")


def _effective_arguments(call: ToolCall, spec: ToolSpec) -> dict[str, Any]:
    """Supplied arguments plus schema defaults for omitted optional params, so
    an omitted optional equals an explicitly supplied default."""
    effective = dict(call.arguments)
    for name, param in spec.parameters.items():
        if name not in effective and param.default is not None:
            effective[name] = param.default
    return effective


def match_call(
    candidate: ToolCall, oracle: ToolCall, specs: Iterable[ToolSpec] | Mapping[str, ToolSpec]
) -> int:
    """1 iff the names match and the argument sets are equal after key-order
    normalization and declared-kind coercion."""
    if candidate.tool_name != oracle.tool_name:
        return 0
    by_name = specs if isinstance(specs, Mapping) else _tool_map(specs)
    spec = by_name.get(candidate.tool_name)
    if spec is None:
        return 0
    cand = _effective_arguments(candidate, spec)
    orac = _effective_arguments(oracle, spec)
    if set(cand) != set(orac):
        return 0
    for name in orac:
        param = spec.parameters.get(name)
        try:
            if param is not None:
                left = coerce_to_kind(cand[name], param.kind)
                right = coerce_to_kind(orac[name], param.kind)
            else:
                left = canonical_value(cand[name])
                right = canonical_value(orac[name])
        except _NoMatch:
            return 0
        if left != right:
            return 0
    return 1


_WORD_RE = re.compile(r"\S+")
_NUM_RE = re.compile(r"^[+-]?\d+(?:\.\d+)?$")

_STOPWORDS = frozenset(
    "a an the is are was were be been of to in on at for and or with as by from "
    "it its that this these those your you i we they".split()
)


def _normalize_tokens(text: str) -> list[str]:
    tokens = []
    for token in _WORD_RE.findall(text.casefold()):
        stripped = token.strip(".,;:!?()[]{}\"'")
        if not stripped:
            continue
        if _NUM_RE.match(stripped):
            tokens.append(canonical_value(float(stripped)))
        else:
            tokens.append(stripped)
    return tokens


def match_answer(candidate: str, oracle: str, mode: str = "auto") -> int:
    """Compare final answers after whitespace collapse, case folding, and
    numeric-token canonicalization.

    exact: normalized token sequences must be identical. containment: every
    key oracle token (numbers and non-stopwords) must appear in the candidate.
    auto picks containment for free-text oracles, exact for short ones.
    """
    if not oracle:
        raise InvariantViolation("oracle answer must be non-empty")
    cand_tokens = _normalize_tokens(candidate)
    orac_tokens = _normalize_tokens(oracle)
    if mode == "auto":
        mode = "containment" if len(orac_tokens) > 6 else "exact"
    if mode == "exact":
        return 1 if cand_tokens == orac_tokens else 0
    if mode == "containment":
        key_tokens = {t for t in orac_tokens if t not in _STOPWORDS}
        return 1 if key_tokens <= set(cand_tokens) else 0
    raise ValueError(f"unknown answer match mode: {mode}")


# ---------------------------------------------------------------------------
# Capability-conditioned correctness
# ---------------------------------------------------------------------------

def _match_turn_against_step(turn_calls, step, specs) -> bool:
    """Unordered perfect matching of a turn's call set against one oracle
    step's call set."""
    if len(turn_calls) != len(step.calls):
        return False
    remaining = list(step.calls)
    for call in turn_calls:
        for i, oracle_call in enumerate(remaining):
            if match_call(call, oracle_call, specs):
                del remaining[i]
                break
        else:
            return False
    return True


def _judge_verdict(prompt: str, judge: Backend, max_retries: int) -> int:
    last_error: Exception | None = None
    for _ in range(max_retries):
        try:
            return 1 if parse_binary_verdict(judge.complete(prompt)) else 0
        except BackendError as exc:
            last_error = exc
    raise JudgeUnavailable(
        f"reward judge failed {max_retries} attempts: {last_error}"
    ) from last_error


def score_correctness(
    trajectory: Trajectory,
    instance: AugmentedInstance,
    judge: Backend | None = None,
    *,
    answer_mode: str = "auto",
    max_judge_retries: int = 3,
    judge_templates: Mapping[str, str] | None = None,
) -> tuple[tuple[int, ...], float]:
    """Per-turn correctness plus its mean.

    Exact instances: each tool-use turn is matched against the next pending
    oracle step; the final tool-use turn also requires the final answer to
    match. Judge-assisted instances: one terminal turn holding the judge's
    accept/reject verdict over the whole trajectory.
    """
    specs = _tool_map(instance.tools)
    if instance.meta.verifier is Verifier.EXACT:
        tool_turns = trajectory.tool_call_turns()
        per_turn: list[int] = []
        pending = 0
        steps = instance.oracle_steps
        for turn in tool_turns:
            if pending < len(steps) and _match_turn_against_step(
                turn.parsed, steps[pending], specs
            ):
                per_turn.append(1)
                pending += 1
            else:
                per_turn.append(0)
        if per_turn:
            final = trajectory.final_answer
            answer_ok = final is not None and match_answer(
                final, instance.oracle_answer, mode=answer_mode
            )
            if not answer_ok:
                per_turn[-1] = 0
        r_cor = sum(per_turn) / len(per_turn) if per_turn else 0.0
        return tuple(per_turn), r_cor

    if judge is None:
        raise InvariantViolation("judge backend required for judge-assisted instances")
    prompt = prompts.build_judge_prompt(instance, trajectory, judge_templates)
    verdict = _judge_verdict(prompt, judge, max_judge_retries)
    return (verdict,), float(verdict)


def score(
    trajectory: Trajectory,
    instance: AugmentedInstance,
    weights: RewardWeights = RewardWeights(),
    judge: Backend | None = None,
    *,
    answer_mode: str = "auto",
    max_judge_retries: int = 3,
    judge_templates: Mapping[str, str] | None = None,
) -> RewardBreakdown:
    """Combine the format and correctness components linearly."""
    r_fmt = score_format(trajectory, instance.tools)
    per_turn, r_cor = score_correctness(
        trajectory,
        instance,
        judge,
        answer_mode=answer_mode,
        max_judge_retries=max_judge_retries,
        judge_templates=judge_templates,
    )
    total = weights.lambda_fmt * r_fmt + weights.lambda_cor * r_cor
    return RewardBreakdown(r_fmt=r_fmt, r_cor=r_cor, per_turn=per_turn, total=total)
