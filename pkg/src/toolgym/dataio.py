"""Dataset file I/O: JSONL readers/writers with atomic replace, plus the
trajectory and reject-log record shapes the CLI consumes."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from .errors import ParseError
from .model import (
    AssistantText,
    AssistantToolCall,
    Instance,
    ToolCall,
    ToolResult,
    Trajectory,
    UserMessage,
    parse_instance,
    serialize_instance,
)


def atomic_write_text(path, text: str) -> None:
    """Write via temp-file-and-rename so interrupted runs never leave a
    half-written dataset behind."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_instances(path) -> list[Instance]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(parse_instance(line))
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return out


def write_instances(path, instances: Iterable[Instance]) -> None:
    atomic_write_text(path, "".join(serialize_instance(i) + "\n" for i in instances))


def write_jsonl(path, records: Iterable[dict]) -> None:
    atomic_write_text(
        path, "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    )


def write_json(path, record) -> None:
    atomic_write_text(path, json.dumps(record, ensure_ascii=False, indent=2) + "\n")


def rejection_record(candidate: str, stage: str, diagnostics) -> dict:
    return {
        "record_type": "rejection",
        "candidate": candidate,
        "stage": stage,
        "diagnostics": list(diagnostics),
    }


# ---------------------------------------------------------------------------
# Trajectory files: {"instance_id": ..., "turns": [...]} one per line
# ---------------------------------------------------------------------------

def turn_from_record(rec: dict):
    kind = rec.get("type")
    if kind == "user":
        return UserMessage(rec["text"])
    if kind == "assistant_text":
        return AssistantText(rec["text"])
    if kind == "tool_result":
        return ToolResult(rec["text"])
    if kind == "assistant_tool_call":
        return AssistantToolCall(
            raw_text=rec["raw_text"],
            parsed=tuple(
                ToolCall(tool_name=c["tool_name"], arguments=c.get("arguments", {}))
                for c in rec.get("parsed", [])
            ),
        )
    raise ParseError(f"unknown turn type: {kind!r}")


def read_trajectories(path) -> list[tuple[str, Trajectory]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                instance_id = rec["instance_id"]
                turns = tuple(turn_from_record(t) for t in rec["turns"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed trajectory: {exc}") from exc
            out.append((instance_id, Trajectory(turns=turns)))
    return out
