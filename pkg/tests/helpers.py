"""Shared builders for tests: small instances, synthetic candidate
transcripts, and an oracle-replay policy."""

from __future__ import annotations

import random

from toolgym.model import (
    BaseInstance,
    ParamKind,
    ParamSpec,
    ToolCall,
    ToolSpec,
)
from toolgym.prompts import render_call_block, render_system_prompt
from toolgym.transcript import render_transcript

KIND_POOL = (
    ParamKind.STRING,
    ParamKind.INTEGER,
    ParamKind.FLOAT,
    ParamKind.BOOLEAN,
    ParamKind.ARRAY,
)


def stock_instance(instance_id: str = "base-stock") -> BaseInstance:
    tool = ToolSpec(
        name="get_stock_price",
        description="Retrieves the latest trading price for a stock ticker symbol.",
        parameters={
            "ticker": ParamSpec(
                kind=ParamKind.STRING,
                description="The exchange ticker symbol.",
                required=True,
            )
        },
    )
    return BaseInstance(
        id=instance_id,
        system_prompt=render_system_prompt([tool]),
        user_query="What is Tesla's stock trading at right now?",
        tools=(tool,),
        oracle_call=ToolCall("get_stock_price", {"ticker": "TSLA"}),
        oracle_output="TSLA last traded at 244.12 USD.",
        oracle_answer="Tesla (TSLA) is currently trading at 244.12 USD.",
    )


def make_tool(index: int, n_params: int = 2) -> ToolSpec:
    params = {}
    for p in range(n_params):
        kind = KIND_POOL[(index + p) % len(KIND_POOL)]
        params[f"arg{p}"] = ParamSpec(
            kind=kind, description=f"argument {p}", required=(p == 0)
        )
    return ToolSpec(
        name=f"lookup_record_{index}",
        description=f"Looks up record set {index} by key.",
        parameters=params,
    )


def _value_for(kind: ParamKind, salt: int):
    if kind is ParamKind.STRING:
        return f"value-{salt}"
    if kind is ParamKind.INTEGER:
        return 10 + salt
    if kind is ParamKind.FLOAT:
        return 0.5 + salt
    if kind is ParamKind.BOOLEAN:
        return salt % 2 == 0
    if kind is ParamKind.ARRAY:
        return [f"item-{salt}", f"item-{salt + 1}"]
    return {"key": f"value-{salt}"}


def make_instance(index: int, n_params: int = 2, id_prefix: str = "syn") -> BaseInstance:
    tool = make_tool(index, n_params)
    args = {
        name: _value_for(p.kind, index + i)
        for i, (name, p) in enumerate(tool.parameters.items())
    }
    call = ToolCall(tool.name, args)
    return BaseInstance(
        id=f"{id_prefix}-{index:04d}",
        system_prompt=render_system_prompt([tool]),
        user_query=f"Please look up record {index} for key value-{index}.",
        tools=(tool,),
        oracle_call=call,
        oracle_output=f"Record {index}: status green, score {index * 3 + 7}.",
        oracle_answer=f"Record {index} reports status green with a score of {index * 3 + 7}.",
    )


def candidate_transcript(index: int, **kwargs) -> str:
    """A distinct, fully valid generator output."""
    return render_transcript(make_instance(index, **kwargs))


def oracle_policy_texts(instance) -> list[str]:
    """Assistant messages that replay an instance's oracle plan, ending with
    the oracle answer (empty string when the instance has none)."""
    texts = []
    for step in instance.oracle_steps:
        texts.append("\n".join(render_call_block(c) for c in step.calls))
    answer = getattr(instance, "oracle_answer", None)
    texts.append(answer if answer is not None else "The tool did not return a usable result.")
    return texts


def fuzz_call(rng: random.Random, n_args: int = 3) -> tuple[ToolSpec, ToolCall]:
    """Random schema + matching call for signature/matcher fuzzing."""
    params = {}
    args = {}
    for i in range(n_args):
        kind = KIND_POOL[rng.randrange(len(KIND_POOL))]
        name = f"p{i}"
        params[name] = ParamSpec(kind=kind, required=True)
        args[name] = _value_for(kind, rng.randrange(100))
    tool = ToolSpec(name=f"fuzz_tool_{rng.randrange(10**6)}", parameters=params)
    return tool, ToolCall(tool.name, args)


def permuted(call: ToolCall, rng: random.Random) -> ToolCall:
    keys = list(call.arguments)
    rng.shuffle(keys)
    return ToolCall(call.tool_name, {k: call.arguments[k] for k in keys})


def reformatted(call: ToolCall, rng: random.Random, spec: ToolSpec) -> ToolCall:
    """Schema-kind-preserving value reformatting: ints as floats, floats and
    bools as strings, padded strings."""
    new_args = {}
    for name, value in call.arguments.items():
        kind = spec.parameters[name].kind
        choice = rng.randrange(3)
        if kind is ParamKind.INTEGER:
            new_args[name] = [value, float(value), f" {value} "][choice]
        elif kind is ParamKind.FLOAT:
            new_args[name] = [value, f"{value}", f"{value:.4f}"][choice]
        elif kind is ParamKind.BOOLEAN:
            new_args[name] = [value, str(value).lower(), str(value).upper()][choice]
        elif kind is ParamKind.STRING:
            new_args[name] = [value, f" {value}", f"{value} "][choice]
        else:
            new_args[name] = value
    return ToolCall(call.tool_name, new_args)
