"""Declarative run configuration.

One JSON file covers pipeline parameters, reward weights, knobs, and backend
definitions; ${VAR} references are interpolated from the environment so
secrets stay out of the file. CLI flags override file values.
"""

from __future__ import annotations

import json
import os
import re
from pathlib import Path

from .backends import Backend, BackendConfig, RemoteBackend, ScriptedBackend
from .errors import DataError

_ENV_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def _interpolate(value):
    if isinstance(value, str):
        def sub(m):
            name = m.group(1)
            if name not in os.environ:
                raise DataError(f"config references unset environment variable {name}")
            return os.environ[name]

        return _ENV_RE.sub(sub, value)
    if isinstance(value, list):
        return [_interpolate(v) for v in value]
    if isinstance(value, dict):
        return {k: _interpolate(v) for k, v in value.items()}
    return value


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataError("config root must be a JSON object")
    return _interpolate(raw)


def build_backend(spec: dict | None) -> Backend | None:
    """Instantiate a backend from its config block.

    Scripted blocks load their responses from a JSON file: either a list
    (queue mode) or an object keyed by prompt hash (keyed mode).
    """
    if spec is None:
        return None
    kind = spec.get("kind", "scripted")
    if kind == "remote":
        return RemoteBackend(
            BackendConfig(
                kind="remote",
                endpoint=spec.get("endpoint"),
                model_name=spec.get("model_name"),
                api_key_env=spec.get("api_key_env"),
                timeout=float(spec.get("timeout", 30.0)),
                max_retries=int(spec.get("max_retries", 3)),
                temperature=float(spec.get("temperature", 0.0)),
                max_in_flight=int(spec.get("max_in_flight", 8)),
            )
        )
    if kind == "scripted":
        responses_file = spec.get("responses_file")
        if responses_file is None:
            raise DataError("scripted backend config needs responses_file")
        try:
            body = json.loads(Path(responses_file).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot load scripted responses: {exc}") from exc
        if isinstance(body, list):
            return ScriptedBackend(responses=body)
        if isinstance(body, dict):
            return ScriptedBackend(keyed=body)
        raise DataError("scripted responses file must hold a JSON list or object")
    raise DataError(f"unknown backend kind: {kind}")
