"""Transcript parsing/rendering against the golden example episodes."""

from __future__ import annotations

import pytest

import helpers
import golden_fixtures as fx
from toolgym.errors import ParseError
from toolgym.model import AssistantToolCall, parse_instance, serialize_instance
from toolgym.transcript import (
    build_trajectory,
    oracle_trajectory,
    parse_transcript,
    render_transcript,
    to_instance,
)
from toolgym.validation import check_format


def _calls_per_block(parsed):
    out = []
    for raw in parsed.assistant_blocks:
        report, calls = check_format(raw)
        assert report.passed, report.diagnostics
        out.append(calls)
    return out


def test_editorial_episode_parses():
    parsed = parse_transcript(fx.editorial_transcript())
    assert len(parsed.tools) == 1
    assert parsed.tools[0].name == "editorial_content_planner"
    assert parsed.user_query == fx.EDITORIAL_QUERY
    assert parsed.final_answer == fx.EDITORIAL_ANSWER
    calls = _calls_per_block(parsed)
    assert len(calls) == 1 and len(calls[0]) == 1
    call = calls[0][0]
    assert call.tool_name == "editorial_content_planner"
    assert call.arguments["blog_categories"] == ["travel", "food", "wellness"]
    assert call.arguments["content_frequency"] == 3


def test_editorial_instance_round_trips_through_line_format():
    parsed = parse_transcript(fx.editorial_transcript())
    inst = to_instance(parsed, "fig-editorial", _calls_per_block(parsed))
    assert len(inst.tools) == 1
    line = serialize_instance(inst)
    back = parse_instance(line)
    assert back == inst
    trajectory = build_trajectory(parsed, _calls_per_block(parsed))
    assert len(trajectory.tool_call_turns()) == 1


def test_cover_letter_episode_is_two_turns_two_tools():
    parsed = parse_transcript(fx.cover_letter_transcript())
    assert [t.name for t in parsed.tools] == [
        "get_industry_focus_code",
        "design_cover_letter_template",
    ]
    calls = _calls_per_block(parsed)
    assert len(calls) == 2
    assert calls[0][0].arguments == {"industry_type": "technology"}
    assert calls[1][0].arguments["industry_focus"] == 12
    assert calls[1][0].arguments["experience_years"] == 3.5


def test_carbon_episode_parallel_calls_share_one_turn():
    parsed = parse_transcript(fx.carbon_transcript())
    calls = _calls_per_block(parsed)
    assert len(calls) == 1 and len(calls[0]) == 2
    assert calls[0][0].arguments["is_secondhand"] is False
    assert calls[0][1].arguments["is_secondhand"] is True
    assert parsed.tool_outputs[0] == (fx.CARBON_OUTPUT_NEW, fx.CARBON_OUTPUT_USED)


def test_render_parse_round_trip():
    inst = helpers.make_instance(5)
    parsed = parse_transcript(render_transcript(inst))
    rebuilt = to_instance(parsed, inst.id, _calls_per_block(parsed))
    assert rebuilt == inst


def test_multiturn_render_parse_round_trip():
    inst = fx.cover_letter_instance()
    parsed = parse_transcript(render_transcript(inst))
    rebuilt = to_instance(parsed, inst.id, _calls_per_block(parsed))
    assert rebuilt == inst


def test_oracle_trajectory_shape():
    inst = fx.cover_letter_instance()
    trajectory = oracle_trajectory(inst)
    turns = trajectory.tool_call_turns()
    assert len(turns) == 2
    assert all(isinstance(t, AssistantToolCall) for t in turns)
    assert trajectory.final_answer == inst.oracle_answer


def test_structural_errors():
    with pytest.raises(ParseError, match="no <\\|im_start\\|> blocks"):
        parse_transcript("just text")
    with pytest.raises(ParseError, match="system"):
        parse_transcript("<|im_start|>user\nhi\n<|im_end|>")
    good = render_transcript(helpers.make_instance(1))
    headless = good.replace("<|im_start|>user", "<|im_start|>tool", 1)
    with pytest.raises(ParseError):
        parse_transcript(headless)
    # transcript ending on a tool-call turn has no final answer
    truncated = good.rsplit("<|im_start|>assistant", 1)[0].rstrip()
    with pytest.raises(ParseError, match="final answer"):
        parse_transcript(truncated)


def test_tools_section_required():
    text = (
        "<|im_start|>system\nno tools here\n<|im_end|>\n"
        "<|im_start|>user\nq\n<|im_end|>\n"
        "<|im_start|>assistant\nanswer\n<|im_end|>"
    )
    with pytest.raises(ParseError, match="<tools>"):
        parse_transcript(text)
