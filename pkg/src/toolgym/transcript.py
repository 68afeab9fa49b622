"""Chat-markup transcripts: the episode format generator backends emit and
golden fixtures are written in.

A transcript is a sequence of `<|im_start|>role ... <|im_end|>` blocks with
roles system/user/assistant/tool. Parsing here is purely structural; whether
the assistant blocks contain well-formed tool calls is the format checker's
job, so a candidate with mangled `<tool_call>` payloads still parses and gets
rejected at the right stage.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import ParseError
from .model import (
    AssistantText,
    AssistantToolCall,
    BaseInstance,
    OracleStep,
    ToolCall,
    ToolResult,
    ToolSpec,
    Trajectory,
    UserMessage,
)
from .prompts import render_call_block, render_system_prompt, tool_from_wire

_BLOCK_RE = re.compile(r"<\|im_start\|>(\w+)\n(.*?)<\|im_end\|>", re.DOTALL)
# Block form only: the prompt prose also mentions "<tools></tools>" inline,
# which must not match.
_TOOLS_RE = re.compile(r"<tools>\n(.*?)\n</tools>", re.DOTALL)


@dataclass(frozen=True)
class TranscriptBlock:
    role: str
    text: str


@dataclass(frozen=True)
class ParsedTranscript:
    system_text: str
    tools: tuple[ToolSpec, ...]
    user_query: str
    assistant_blocks: tuple[str, ...]        # raw text of tool-call turns, in order
    tool_outputs: tuple[tuple[str, ...], ...]  # outputs grouped per tool-call turn
    final_answer: str


def split_blocks(text: str) -> list[TranscriptBlock]:
    blocks = [
        TranscriptBlock(role=m.group(1), text=m.group(2).strip("\n"))
        for m in _BLOCK_RE.finditer(text)
    ]
    if not blocks:
        raise ParseError("transcript contains no <|im_start|> blocks")
    return blocks


def parse_tools_block(system_text: str) -> tuple[ToolSpec, ...]:
    m = _TOOLS_RE.search(system_text)
    if not m:
        raise ParseError("system block has no <tools> section")
    tools = []
    for line in m.group(1).splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"tool signature is not valid JSON: {line[:60]}") from exc
        tools.append(tool_from_wire(rec))
    if not tools:
        raise ParseError("tools section is empty")
    return tuple(tools)


def parse_transcript(text: str) -> ParsedTranscript:
    """Structural parse of one episode transcript.

    Expected block order: system, user, then alternating assistant/tool
    groups, ending with a plain assistant block (the final answer).
    """
    blocks = split_blocks(text)
    if blocks[0].role != "system":
        raise ParseError("transcript must start with a system block")
    if len(blocks) < 2 or blocks[1].role != "user":
        raise ParseError("transcript missing user block")
    tools = parse_tools_block(blocks[0].text)
    user_query = blocks[1].text

    assistant_blocks: list[str] = []
    tool_outputs: list[tuple[str, ...]] = []
    final_answer: str | None = None
    i = 2
    while i < len(blocks):
        block = blocks[i]
        if block.role != "assistant":
            raise ParseError(f"unexpected {block.role} block where assistant expected")
        if "<tool_call>" in block.text:
            outputs = []
            i += 1
            while i < len(blocks) and blocks[i].role == "tool":
                outputs.append(blocks[i].text)
                i += 1
            assistant_blocks.append(block.text)
            tool_outputs.append(tuple(outputs))
        else:
            final_answer = block.text
            i += 1
            if i != len(blocks):
                raise ParseError("final answer block must end the transcript")
    if final_answer is None:
        raise ParseError("transcript has no final answer block")
    return ParsedTranscript(
        system_text=blocks[0].text,
        tools=tools,
        user_query=user_query,
        assistant_blocks=tuple(assistant_blocks),
        tool_outputs=tuple(tool_outputs),
        final_answer=final_answer,
    )


def build_trajectory(parsed: ParsedTranscript, calls_per_block) -> Trajectory:
    """Assemble a Trajectory from a parsed transcript plus the calls the
    format checker extracted for each assistant block."""
    turns: list = [UserMessage(parsed.user_query)]
    for raw, outputs, calls in zip(
        parsed.assistant_blocks, parsed.tool_outputs, calls_per_block
    ):
        turns.append(AssistantToolCall(raw_text=raw, parsed=tuple(calls)))
        for out in outputs:
            turns.append(ToolResult(out))
    turns.append(AssistantText(parsed.final_answer))
    return Trajectory(turns=tuple(turns))


def to_instance(parsed: ParsedTranscript, instance_id: str, calls_per_block) -> BaseInstance:
    """Materialize a BaseInstance from a fully format-checked transcript.

    The stored system prompt is re-rendered from the canonical template so
    generator formatting quirks never leak into the dataset.
    """
    steps = []
    for calls, outputs in zip(calls_per_block, parsed.tool_outputs):
        steps.append(OracleStep(calls=tuple(calls), outputs=tuple(outputs)))
    if not steps:
        raise ParseError("transcript has no tool-call turns")
    return BaseInstance(
        id=instance_id,
        system_prompt=render_system_prompt(parsed.tools),
        user_query=parsed.user_query,
        tools=parsed.tools,
        oracle_call=steps[0].calls[0],
        oracle_output=steps[0].outputs[0],
        oracle_answer=parsed.final_answer,
        oracle_steps=tuple(steps),
    )


def render_transcript(instance: BaseInstance) -> str:
    """Render an instance back into the episode transcript format (used for
    in-context exemplars and fixtures)."""
    parts = [
        f"<|im_start|>system\n{instance.system_prompt}\n<|im_end|>",
        f"<|im_start|>user\n{instance.user_query}\n<|im_end|>",
    ]
    for step in instance.oracle_steps:
        call_lines = "\n".join(render_call_block(c) for c in step.calls)
        parts.append(f"<|im_start|>assistant\n{call_lines}\n<|im_end|>")
        for out in step.outputs:
            parts.append(f"<|im_start|>tool\n{out}\n<|im_end|>")
    parts.append(f"<|im_start|>assistant\n{instance.oracle_answer}\n<|im_end|>")
    return "\n".join(parts)


def oracle_trajectory(instance) -> Trajectory:
    """The reference trajectory an instance's own oracle fields describe.

    Works for base and augmented instances; for augmented ones the planned
    (possibly perturbed) outputs are used. Judge-assisted instances have no
    oracle answer, so the replay ends without a final text turn.
    """
    turns: list = [UserMessage(instance.user_query)]
    for step in instance.oracle_steps:
        raw = "\n".join(render_call_block(c) for c in step.calls)
        turns.append(AssistantToolCall(raw_text=raw, parsed=step.calls))
        for out in step.outputs:
            turns.append(ToolResult(out))
    answer = getattr(instance, "oracle_answer", None)
    if answer is not None:
        turns.append(AssistantText(answer))
    return Trajectory(turns=tuple(turns))
