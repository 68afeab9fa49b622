"""Config loading, env-var interpolation, and backend construction."""

from __future__ import annotations

import json

import pytest

from toolgym.backends import RemoteBackend, ScriptedBackend
from toolgym.config import build_backend, load_config
from toolgym.errors import DataError


def test_env_var_interpolation(tmp_path, monkeypatch):
    monkeypatch.setenv("POOL_DIR", "/data/pools")
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps({"generate": {"out": "${POOL_DIR}/run1.jsonl"}, "seed": 3}),
        encoding="utf-8",
    )
    config = load_config(path)
    assert config["generate"]["out"] == "/data/pools/run1.jsonl"
    assert config["seed"] == 3


def test_unset_env_var_is_an_error(tmp_path, monkeypatch):
    monkeypatch.delenv("DEFINITELY_UNSET_VAR", raising=False)
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"key": "${DEFINITELY_UNSET_VAR}"}), encoding="utf-8")
    with pytest.raises(DataError, match="DEFINITELY_UNSET_VAR"):
        load_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_config(tmp_path / "nope.json")


def test_build_scripted_backend_queue_and_keyed(tmp_path):
    queue_file = tmp_path / "queue.json"
    queue_file.write_text(json.dumps(["a", "b"]), encoding="utf-8")
    backend = build_backend({"kind": "scripted", "responses_file": str(queue_file)})
    assert isinstance(backend, ScriptedBackend)
    assert backend.complete("x") == "a"

    keyed_file = tmp_path / "keyed.json"
    keyed_file.write_text(json.dumps({"deadbeef": "r"}), encoding="utf-8")
    backend = build_backend({"kind": "scripted", "responses_file": str(keyed_file)})
    assert isinstance(backend, ScriptedBackend)


def test_build_remote_backend():
    backend = build_backend(
        {"kind": "remote", "endpoint": "http://localhost:1/v1", "model_name": "m"}
    )
    assert isinstance(backend, RemoteBackend)


def test_build_backend_rejects_nonsense():
    assert build_backend(None) is None
    with pytest.raises(DataError):
        build_backend({"kind": "scripted"})
    with pytest.raises(DataError):
        build_backend({"kind": "telepathic"})
