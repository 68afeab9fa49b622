"""Format/rule/semantic checker behavior, short-circuiting, and dedup."""

from __future__ import annotations

import random

import pytest

import helpers
import golden_fixtures as fx
from toolgym.backends import ScriptedBackend
from toolgym.errors import BackendUnavailable, JudgeUnavailable
from toolgym.generation import SeedPool
from toolgym.model import BaseInstance, ParamKind, ParamSpec, ToolCall, ToolSpec
from toolgym.transcript import oracle_trajectory, render_transcript
from toolgym.validation import (
    Stage,
    check_format,
    check_rules,
    check_semantic,
    dedup_insert,
    validate_full,
)


# ---------------------------------------------------------------------------
# Format checker
# ---------------------------------------------------------------------------

def test_format_single_valid_call():
    report, calls = check_format(
        '<tool_call>{"name":"get_stock_price","arguments":{"ticker":"TSLA"}}</tool_call>'
    )
    assert report.passed
    assert len(calls) == 1
    assert calls[0].tool_name == "get_stock_price"
    assert calls[0].arguments == {"ticker": "TSLA"}


def test_format_unclosed_tag():
    report, _ = check_format('<tool_call>{"name":"f","arguments":{}}')
    assert not report.passed
    assert "unclosed tool_call tag" in report.diagnostics


def test_format_invalid_json_payload():
    report, _ = check_format("<tool_call>not json</tool_call>")
    assert not report.passed
    assert "invalid JSON payload" in report.diagnostics


def test_format_stray_close_and_nesting():
    report, _ = check_format("text </tool_call> more")
    assert "unexpected closing tool_call tag" in report.diagnostics
    report, _ = check_format(
        '<tool_call><tool_call>{"name":"f","arguments":{}}</tool_call></tool_call>'
    )
    assert not report.passed
    assert "nested tool_call tag" in report.diagnostics


def test_format_payload_shape_requirements():
    report, _ = check_format("<tool_call>[1,2]</tool_call>")
    assert "payload must be a JSON object" in report.diagnostics
    report, _ = check_format('<tool_call>{"arguments":{}}</tool_call>')
    assert "payload missing name field" in report.diagnostics
    report, _ = check_format('<tool_call>{"name":"f","arguments":[]}</tool_call>')
    assert "payload arguments must be an object" in report.diagnostics
    report, _ = check_format('<tool_call>{"name":"f"}</tool_call>')
    assert "payload arguments must be an object" in report.diagnostics


def test_format_multiple_calls_document_order_with_surrounding_text():
    text = (
        "Let me check both.\n"
        '<tool_call>{"name":"a","arguments":{}}</tool_call>\n'
        "and then\n"
        '<tool_call> {"name":"b","arguments":{"x":1}} </tool_call>\n'
        "done"
    )
    report, calls = check_format(text)
    assert report.passed
    assert [c.tool_name for c in calls] == ["a", "b"]


def test_format_other_tags_are_opaque():
    report, calls = check_format("<tools>\nnot a call\n</tools> plain text")
    assert report.passed and calls == []


def test_format_corruption_fuzz_always_flips_to_fail():
    rng = random.Random(99)
    base = (
        'intro <tool_call>{"name":"f","arguments":{"x":1}}</tool_call> middle '
        '<tool_call>{"name":"g","arguments":{"y":"z"}}</tool_call> outro'
    )
    assert check_format(base)[0].passed

    def corrupt(text: str, which: int) -> str:
        if which == 0:  # drop one closing tag
            return text.replace("</tool_call>", "", 1)
        if which == 1:  # inject a stray closing tag
            pos = rng.randrange(len(text))
            return text[:pos] + "</tool_call>" + text[pos:]
        if which == 2:  # mangle a payload
            return text.replace('{"name":"f"', '{"name" "f"', 1)
        if which == 3:  # nest an opening tag
            return text.replace("<tool_call>", "<tool_call><tool_call>", 1)
        return text.replace('"arguments"', '"args"', 1)  # drop required key

    for trial in range(200):
        report, _ = check_format(corrupt(base, trial % 5))
        assert not report.passed


# ---------------------------------------------------------------------------
# Rule checker
# ---------------------------------------------------------------------------

def test_rules_aws_pricing_case_study_passes():
    report = check_rules(
        ToolCall("get_aws_pricing", {"memory": 2, "cpu": "single"}),
        fx.aws_pricing_tool(),
    )
    assert report.passed


def test_rules_missing_required_parameter():
    report = check_rules(ToolCall("get_aws_pricing", {"cpu": "single"}), fx.aws_pricing_tool())
    assert not report.passed
    assert "missing required parameter: memory" in report.diagnostics


def test_rules_enum_violation_weather_unit():
    report = check_rules(
        ToolCall("get_current_weather", {"location": "Mariposa, CA", "unit": "kelvin"}),
        fx.weather_tool(),
    )
    assert not report.passed
    assert "enum violation: unit" in report.diagnostics


def test_rules_undeclared_parameter():
    report = check_rules(
        ToolCall("get_aws_pricing", {"memory": 2, "cpu": "single", "zone": "a"}),
        fx.aws_pricing_tool(),
    )
    assert "undeclared parameter: zone" in report.diagnostics


def test_rules_no_coercion_during_validation():
    report = check_rules(
        ToolCall("get_aws_pricing", {"memory": "2", "cpu": "single"}),
        fx.aws_pricing_tool(),
    )
    assert "type mismatch: memory expects integer" in report.diagnostics
    report = check_rules(
        ToolCall("get_aws_pricing", {"memory": True, "cpu": "single"}),
        fx.aws_pricing_tool(),
    )
    assert "type mismatch: memory expects integer" in report.diagnostics


def test_rules_range_violation():
    report = check_rules(
        ToolCall(
            "calculate_fashion_carbon_footprint",
            {
                "garment_type": "shirt",
                "material_blend": "cotton",
                "production_distance": 99999.0,
                "is_secondhand": False,
            },
        ),
        fx.carbon_tool(),
    )
    assert "range violation: production_distance" in report.diagnostics


def test_rules_monotone_under_added_enum_constraint():
    rng = random.Random(3)
    for _ in range(100):
        spec, call = helpers.fuzz_call(rng, n_args=2)
        relaxed = check_rules(call, spec).passed
        constrained = {}
        for name, p in spec.parameters.items():
            if p.kind in (ParamKind.STRING, ParamKind.INTEGER) and rng.random() < 0.5:
                # enum that excludes the supplied value
                bogus = "something-else" if p.kind is ParamKind.STRING else -999999
                constrained[name] = ParamSpec(
                    kind=p.kind, required=p.required, enum_values=(bogus,)
                )
            else:
                constrained[name] = p
        stricter = ToolSpec(name=spec.name, parameters=constrained)
        if not relaxed:
            assert not check_rules(call, stricter).passed


# ---------------------------------------------------------------------------
# Semantic checker
# ---------------------------------------------------------------------------

def _episode(inst):
    return oracle_trajectory(inst)


def test_semantic_accept_and_reject_pass_through():
    inst = helpers.stock_instance()
    accept = check_semantic(_episode(inst), inst, ScriptedBackend(["ACCEPT"]))
    assert accept.passed and accept.stage is Stage.SEMANTIC
    reject = check_semantic(_episode(inst), inst, ScriptedBackend(["thinking...\nREJECT"]))
    assert not reject.passed


def test_semantic_prompt_carries_episode_inputs():
    inst = helpers.stock_instance()
    judge = ScriptedBackend(["ACCEPT"])
    check_semantic(_episode(inst), inst, judge)
    prompt = judge.calls[0]
    assert "get_stock_price" in prompt
    assert inst.user_query in prompt
    assert inst.oracle_output in prompt
    assert inst.oracle_answer in prompt


def test_semantic_judge_unavailable_after_retries():
    inst = helpers.stock_instance()
    judge = ScriptedBackend(
        [BackendUnavailable("down"), BackendUnavailable("down"), BackendUnavailable("down")]
    )
    with pytest.raises(JudgeUnavailable):
        check_semantic(_episode(inst), inst, judge, max_retries=3)
    assert judge.remaining() == 0


def test_semantic_unparseable_verdicts_count_as_failures():
    inst = helpers.stock_instance()
    judge = ScriptedBackend(["hmm", "unclear", "ACCEPT"])
    report = check_semantic(_episode(inst), inst, judge, max_retries=3)
    assert report.passed


# ---------------------------------------------------------------------------
# validate_full
# ---------------------------------------------------------------------------

def test_validate_full_accepts_valid_candidate():
    judge = ScriptedBackend(["ACCEPT"])
    result = validate_full(
        helpers.candidate_transcript(3), judge=judge, instance_id="cand-3"
    )
    assert result.accepted
    assert [r.stage for r in result.reports] == [Stage.FORMAT, Stage.RULE, Stage.SEMANTIC]
    assert all(r.passed for r in result.reports)
    assert result.instance.id == "cand-3"


def test_validate_full_short_circuits_format_before_judge():
    judge = ScriptedBackend(["ACCEPT"])
    # strip the assistant turn's closing tag (the last one; the system prompt's
    # instruction block also mentions the tags and must stay untouched)
    broken = "".join(helpers.candidate_transcript(3).rsplit("</tool_call>", 1))
    result = validate_full(broken, judge=judge, instance_id="x")
    assert not result.accepted
    assert result.rejection_stage is Stage.FORMAT
    assert judge.calls == []


def test_validate_full_rule_stage_rejection():
    judge = ScriptedBackend(["ACCEPT"])
    candidate = helpers.candidate_transcript(2)
    # break a declared argument's type: arg0 of lookup_record_2 is a float
    broken = candidate.replace('"arg0": 2.5', '"arg0": "not-a-number"')
    assert broken != candidate
    result = validate_full(broken, judge=judge, instance_id="x")
    assert result.rejection_stage is Stage.RULE
    assert judge.calls == []


def test_validate_full_semantic_rejection():
    judge = ScriptedBackend(["REJECT"])
    result = validate_full(
        helpers.candidate_transcript(4), judge=judge, instance_id="x"
    )
    assert not result.accepted
    assert result.rejection_stage is Stage.SEMANTIC


def test_validate_full_single_tool_rule():
    judge = ScriptedBackend(["ACCEPT"])
    two_tool = render_transcript(fx.cover_letter_instance())
    result = validate_full(
        two_tool, judge=judge, instance_id="x", require_single_tool=True
    )
    assert result.rejection_stage is Stage.FORMAT
    loose = validate_full(two_tool, judge=ScriptedBackend(["ACCEPT"]), instance_id="x")
    assert loose.accepted


def test_validate_full_unknown_tool_is_rule_stage():
    judge = ScriptedBackend(["ACCEPT"])
    # rename only the call payload's tool (the last "name" mention), leaving
    # the schema in the system block intact
    candidate = '"name": "other_tool"'.join(
        helpers.candidate_transcript(5).rsplit('"name": "lookup_record_5"', 1)
    )
    result = validate_full(candidate, judge=judge, instance_id="x")
    assert result.rejection_stage is Stage.RULE
    assert any("unknown tool" in d for d in result.diagnostics)


# ---------------------------------------------------------------------------
# Dedup
# ---------------------------------------------------------------------------

def test_dedup_insert_idempotent():
    pool = SeedPool()
    inst = helpers.stock_instance()
    assert dedup_insert(pool, inst)
    assert not dedup_insert(pool, inst)
    assert len(pool) == 1


def test_dedup_key_order_invariant():
    pool = SeedPool()
    first = helpers.make_instance(1)
    args = dict(first.oracle_call.arguments)
    shuffled_call = ToolCall(
        first.oracle_call.tool_name, {k: args[k] for k in reversed(list(args))}
    )
    second = BaseInstance(
        id="differs-only-in-arg-order",
        system_prompt=first.system_prompt,
        user_query="A differently phrased query for the same call.",
        tools=first.tools,
        oracle_call=shuffled_call,
        oracle_output=first.oracle_output,
        oracle_answer=first.oracle_answer,
    )
    assert dedup_insert(pool, first)
    assert not dedup_insert(pool, second)
    assert len(pool) == 1


def test_dedup_distinct_tools_both_insert():
    pool = SeedPool()
    assert dedup_insert(pool, helpers.make_instance(1))
    assert dedup_insert(pool, helpers.make_instance(2))
    assert len(pool) == 2
