"""Prompt construction: the function-calling system prompt, tool-schema wire
rendering, and the templates fed to generator and judge backends.

The system prompt template is a fixed external interface; its rendered form
must stay byte-stable because trained policies see it verbatim.
"""

from __future__ import annotations

import json
from importlib import resources
from string import Template
from typing import Iterable, Mapping

from .errors import ParseError
from .model import (
    AssistantText,
    AssistantToolCall,
    AugmentedInstance,
    CapabilityFamily,
    ParamKind,
    ParamSpec,
    ToolCall,
    ToolResult,
    ToolSpec,
    Trajectory,
    UserMessage,
)

TOOL_LIST_SLOT = "{tool_list}"

SYSTEM_PROMPT_TEMPLATE = (
    "# Tools\n"
    "\n"
    "You may call one or more functions to assist with the user query.\n"
    "\n"
    "You are provided with function signatures within <tools></tools> XML tags:\n"
    "<tools>\n"
    "{tool_list}\n"
    "</tools>\n"
    "\n"
    "For each function call, return a json object with function name and arguments "
    "within <tool_call></tool_call> XML tags:\n"
    "<tool_call>\n"
    '{"name": <function-name>, "arguments": <args-json-object>}\n'
    "</tool_call>"
)


def _kind_to_wire(kind: ParamKind) -> str:
    # nested objects are written as "dict" in the schema dialect the prompt uses
    return "dict" if kind is ParamKind.OBJECT else kind.value


def tool_to_wire(tool: ToolSpec) -> dict:
    """Tool schema in the shape embedded in system prompts."""
    properties = {}
    for name, p in tool.parameters.items():
        prop: dict = {"type": _kind_to_wire(p.kind), "description": p.description}
        if p.enum_values is not None:
            prop["enum"] = list(p.enum_values)
        if p.range is not None:
            prop["minimum"], prop["maximum"] = p.range
        if p.default is not None:
            prop["default"] = p.default
        properties[name] = prop
    return {
        "name": tool.name,
        "description": tool.description,
        "parameters": {
            "type": "dict",
            "required": tool.required_params,
            "properties": properties,
        },
    }


def tool_from_wire(rec: dict) -> ToolSpec:
    """Inverse of tool_to_wire, tolerant of the schema dialect's aliases."""
    if not isinstance(rec, dict) or not rec.get("name"):
        raise ParseError("malformed field: tool wire record missing name")
    params = rec.get("parameters") or {}
    required = set(params.get("required") or [])
    properties = params.get("properties") or {}
    out = {}
    for pname, prop in properties.items():
        if not isinstance(prop, dict) or "type" not in prop:
            raise ParseError(f"malformed field: parameters.{pname}.type")
        rng = None
        if "minimum" in prop or "maximum" in prop:
            lo = prop.get("minimum", float("-inf"))
            hi = prop.get("maximum", float("inf"))
            rng = (lo, hi)
        from .model import parse_kind  # local import keeps module load light

        out[pname] = ParamSpec(
            kind=parse_kind(prop["type"]),
            description=prop.get("description", ""),
            required=pname in required,
            enum_values=tuple(prop["enum"]) if prop.get("enum") is not None else None,
            range=rng,
            default=prop.get("default"),
        )
    return ToolSpec(name=rec["name"], description=rec.get("description", ""), parameters=out)


def render_tool_list(tools: Iterable[ToolSpec]) -> str:
    """One JSON object per line, matching the shape tools take in prompts."""
    return "\n".join(json.dumps(tool_to_wire(t), ensure_ascii=False) for t in tools)


def render_system_prompt(tools: Iterable[ToolSpec]) -> str:
    return SYSTEM_PROMPT_TEMPLATE.replace(TOOL_LIST_SLOT, render_tool_list(tools))


def render_call(call: ToolCall) -> str:
    return json.dumps(
        {"name": call.tool_name, "arguments": dict(call.arguments)}, ensure_ascii=False
    )


def render_call_block(call: ToolCall) -> str:
    return f"<tool_call>{render_call(call)}</tool_call>"


def render_trajectory(trajectory: Trajectory) -> str:
    """Readable flat rendering used inside judge prompts."""
    lines = []
    for turn in trajectory.turns:
        if isinstance(turn, UserMessage):
            lines.append(f"[user] {turn.text}")
        elif isinstance(turn, AssistantToolCall):
            lines.append(f"[assistant] {turn.raw_text}")
        elif isinstance(turn, ToolResult):
            lines.append(f"[tool] {turn.text}")
        elif isinstance(turn, AssistantText):
            lines.append(f"[assistant] {turn.text}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Template assets
# ---------------------------------------------------------------------------

def load_template(name: str, override_path: str | None = None) -> Template:
    """Load a prompt template asset, optionally replaced by a file on disk."""
    if override_path:
        with open(override_path, encoding="utf-8") as fh:
            return Template(fh.read())
    text = resources.files("toolgym").joinpath(f"assets/{name}.txt").read_text("utf-8")
    return Template(text)


def build_semantic_prompt(
    tools: Iterable[ToolSpec],
    user_query: str,
    trajectory: Trajectory,
    template_path: str | None = None,
) -> str:
    return load_template("semantic_checker", template_path).substitute(
        tools=render_tool_list(tools),
        query=user_query,
        trajectory=render_trajectory(trajectory),
    )


_ERROR_FLAVORS = {
    "failure_message": "an explicit failure message",
    "wrong_content": "silently incorrect",
}

_PROBLEM_FLAVORS = {
    "irrelevant": (
        "off-topic for every available tool",
        "answer directly or say that no available tool applies",
    ),
    "no_tool_needed": (
        "answerable without any tool",
        "answer directly without calling any tool",
    ),
    "missing_params": (
        "missing required information",
        "ask for the missing required information instead of guessing it",
    ),
}


def build_judge_prompt(
    instance: AugmentedInstance,
    trajectory: Trajectory,
    template_paths: Mapping[str, str] | None = None,
) -> str:
    """Behavior-verification prompt for judge-assisted instances, keyed by
    the instance's capability family."""
    family = instance.meta.label.family
    subtype = instance.meta.label.subtype or ""
    overrides = template_paths or {}
    response = trajectory.final_answer or "(no final response)"
    common = dict(
        call=render_call(instance.oracle_call),
        trajectory=render_trajectory(trajectory),
        response=response,
    )
    if family is CapabilityFamily.ERRONEOUS_OUTPUT:
        template = load_template("judge_erroneous", overrides.get(family.value))
        return template.substitute(flavor=_ERROR_FLAVORS[subtype], **common)
    if family is CapabilityFamily.PROBLEMATIC_QUERY:
        template = load_template("judge_problematic", overrides.get(family.value))
        flavor, expected = _PROBLEM_FLAVORS[subtype]
        return template.substitute(flavor=flavor, expected=expected, **common)
    raise ValueError(f"no judge prompt for exact-verifiable family {family.value}")


def build_generation_prompt(
    exemplar_transcript: str,
    domain: str,
    param_kinds: Iterable[str],
    param_count: int,
    behavior: str,
    template_path: str | None = None,
) -> str:
    return load_template("generation", template_path).substitute(
        domain=domain,
        param_kinds=", ".join(param_kinds),
        param_count=str(param_count),
        behavior=behavior,
        exemplar=exemplar_transcript,
    )


def build_rewrite_prompt(level: str, tool: ToolSpec, query: str) -> str:
    template = load_template(f"rewrite_{level}")
    return template.substitute(
        tool_name=tool.name, tool_description=tool.description, query=query
    )


def build_rewrite_verify_prompt(tools: Iterable[ToolSpec], query: str, call: ToolCall) -> str:
    return load_template("rewrite_verify").substitute(
        tools=render_tool_list(tools), query=query, call=render_call(call)
    )


def build_distractor_prompt(tool: ToolSpec, query: str, count: int) -> str:
    return load_template("distractors").substitute(
        tool=json.dumps(tool_to_wire(tool), ensure_ascii=False),
        tool_name=tool.name,
        query=query,
        count=str(count),
    )
