"""Mock tool environment for rollouts.

Episodes walk a fixed oracle plan: a call matching the next pending oracle
call gets that call's planned output, anything else gets a fixed generic
error, and the episode ends at the first plain-text assistant turn or the
turn limit. Observations never expose oracle answers or verifier metadata.

The HTTP layer is a thin JSON wrapper (POST /reset, /step, /finish) over the
in-process runner; sessions are isolated and internally locked, so concurrent
rollouts need no client-side coordination.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Iterable, Mapping

from .backends import Backend
from .errors import (
    BackendError,
    EpisodeStillActive,
    InvariantViolation,
    SessionClosed,
    UnknownInstance,
)
from .model import (
    AssistantText,
    AssistantToolCall,
    AugmentedInstance,
    ToolResult,
    Trajectory,
    Turn,
    UserMessage,
)
from .reward import RewardBreakdown, RewardWeights, match_call, score
from .validation import check_format

DEFAULT_GENERIC_ERROR = "Error: invalid tool call."


class EpisodeStatus(str, Enum):
    ACTIVE = "active"
    DONE_FINAL_ANSWER = "done_final_answer"
    DONE_MAX_TURNS = "done_max_turns"


@dataclass(frozen=True)
class EnvConfig:
    max_turns: int = 6
    generic_error_text: str = DEFAULT_GENERIC_ERROR
    session_ttl: float = 3600.0
    max_connections: int = 64

    def __post_init__(self):
        if self.max_turns < 1:
            raise InvariantViolation("max_turns must be >= 1")
        if self.max_connections < 1:
            raise InvariantViolation("max_connections must be >= 1")


@dataclass
class EpisodeState:
    session_id: str
    instance: AugmentedInstance
    transcript: list[Turn]
    turns_used: int = 0
    status: EpisodeStatus = EpisodeStatus.ACTIVE
    step_index: int = 0
    matched_in_step: set = field(default_factory=set)
    last_touched: float = 0.0
    finished: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)

    def trajectory(self) -> Trajectory:
        return Trajectory(turns=tuple(self.transcript))


class MockToolEnvironment:
    """Session store plus the reset/step/finish episode API."""

    def __init__(
        self,
        instances: Iterable[AugmentedInstance],
        config: EnvConfig = EnvConfig(),
        clock: Callable[[], float] = time.monotonic,
    ):
        self._instances: dict[str, AugmentedInstance] = {}
        for inst in instances:
            if inst.id in self._instances:
                raise InvariantViolation(f"duplicate instance id in dataset: {inst.id}")
            self._instances[inst.id] = inst
        self.config = config
        self._clock = clock
        self._sessions: dict[str, EpisodeState] = {}
        self._registry_lock = threading.Lock()

    # -- session plumbing ---------------------------------------------------

    def _get_session(self, session_id: str) -> EpisodeState:
        with self._registry_lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise SessionClosed(f"no such session: {session_id}")
            if self._clock() - session.last_touched > self.config.session_ttl:
                del self._sessions[session_id]
                raise SessionClosed(f"session expired: {session_id}")
            return session

    # -- episode API ----------------------------------------------------------

    def reset(self, instance_id: str) -> dict:
        instance = self._instances.get(instance_id)
        if instance is None:
            raise UnknownInstance(f"no such instance: {instance_id}")
        session_id = uuid.uuid4().hex
        state = EpisodeState(
            session_id=session_id,
            instance=instance,
            transcript=[UserMessage(instance.user_query)],
            last_touched=self._clock(),
        )
        with self._registry_lock:
            self._sessions[session_id] = state
        return {
            "session_id": session_id,
            "system_prompt": instance.system_prompt,
            "user_query": instance.user_query,
            "status": EpisodeStatus.ACTIVE.value,
        }

    def _serve_calls(self, state: EpisodeState, calls) -> list[str]:
        """One output per call, document order: planned output on a pending
        oracle match, the generic error otherwise."""
        outputs = []
        steps = state.instance.oracle_steps
        specs = state.instance.tools
        for call in calls:
            served = None
            if state.step_index < len(steps):
                step = steps[state.step_index]
                for i, oracle_call in enumerate(step.calls):
                    if i in state.matched_in_step:
                        continue
                    if match_call(call, oracle_call, specs):
                        state.matched_in_step.add(i)
                        served = step.outputs[i]
                        break
                if len(state.matched_in_step) == len(step.calls):
                    state.step_index += 1
                    state.matched_in_step = set()
            outputs.append(served if served is not None else self.config.generic_error_text)
        return outputs

    def step(self, session_id: str, assistant_text: str) -> dict:
        state = self._get_session(session_id)
        with state.lock:
            if state.status is not EpisodeStatus.ACTIVE:
                raise SessionClosed(f"episode already {state.status.value}")
            state.last_touched = self._clock()
            report, calls = check_format(assistant_text)
            tool_results: list[str] = []
            if report.passed and not calls:
                state.transcript.append(AssistantText(assistant_text))
                state.status = EpisodeStatus.DONE_FINAL_ANSWER
            else:
                parsed = tuple(calls) if report.passed else ()
                state.transcript.append(
                    AssistantToolCall(raw_text=assistant_text, parsed=parsed)
                )
                if report.passed:
                    tool_results = self._serve_calls(state, calls)
                else:
                    tool_results = [self.config.generic_error_text]
                for text in tool_results:
                    state.transcript.append(ToolResult(text))
            state.turns_used += 1
            if (
                state.status is EpisodeStatus.ACTIVE
                and state.turns_used >= self.config.max_turns
            ):
                state.status = EpisodeStatus.DONE_MAX_TURNS
            return {"tool_results": tool_results, "status": state.status.value}

    def finish(
        self,
        session_id: str,
        weights: RewardWeights = RewardWeights(),
        judge: Backend | None = None,
        *,
        answer_mode: str = "auto",
        judge_templates: Mapping[str, str] | None = None,
    ) -> tuple[RewardBreakdown, Trajectory]:
        state = self._get_session(session_id)
        with state.lock:
            if state.status is EpisodeStatus.ACTIVE:
                raise EpisodeStillActive(f"episode {session_id} has not terminated")
            state.last_touched = self._clock()
            trajectory = state.trajectory()
            breakdown = score(
                trajectory,
                state.instance,
                weights,
                judge,
                answer_mode=answer_mode,
                judge_templates=judge_templates,
            )
            state.finished = True
            return breakdown, trajectory

    def transcript_of(self, session_id: str) -> Trajectory:
        return self._get_session(session_id).trajectory()


# ---------------------------------------------------------------------------
# Wire protocol
# ---------------------------------------------------------------------------

def _turn_to_record(turn: Turn) -> dict:
    if isinstance(turn, UserMessage):
        return {"type": "user", "text": turn.text}
    if isinstance(turn, AssistantText):
        return {"type": "assistant_text", "text": turn.text}
    if isinstance(turn, AssistantToolCall):
        return {
            "type": "assistant_tool_call",
            "raw_text": turn.raw_text,
            "parsed": [
                {"tool_name": c.tool_name, "arguments": dict(c.arguments)}
                for c in turn.parsed
            ],
        }
    return {"type": "tool_result", "text": turn.text}


def serialize_trajectory(trajectory: Trajectory) -> list[dict]:
    return [_turn_to_record(t) for t in trajectory.turns]


class _EnvRequestHandler(BaseHTTPRequestHandler):
    server_version = "toolgym-env/0.1"
    runner: MockToolEnvironment = None  # set by make_http_server
    weights: RewardWeights = RewardWeights()
    judge: Backend | None = None

    def log_message(self, *args):  # silence per-request stderr noise
        pass

    def _reply(self, status: int, body: dict) -> None:
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, code: str, message: str) -> None:
        self._reply(status, {"error_code": code, "message": message})

    def do_POST(self):
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"{}")
            if not isinstance(payload, dict):
                raise ValueError("payload must be a JSON object")
        except (ValueError, json.JSONDecodeError) as exc:
            self._error(400, "bad_request", f"invalid JSON body: {exc}")
            return
        try:
            if self.path == "/reset":
                if "instance_id" not in payload:
                    self._error(400, "bad_request", "missing field: instance_id")
                    return
                self._reply(200, self.runner.reset(payload["instance_id"]))
            elif self.path == "/step":
                for name in ("session_id", "assistant_text"):
                    if name not in payload:
                        self._error(400, "bad_request", f"missing field: {name}")
                        return
                self._reply(
                    200,
                    self.runner.step(payload["session_id"], payload["assistant_text"]),
                )
            elif self.path == "/finish":
                if "session_id" not in payload:
                    self._error(400, "bad_request", "missing field: session_id")
                    return
                breakdown, trajectory = self.runner.finish(
                    payload["session_id"], self.weights, self.judge
                )
                self._reply(
                    200,
                    {
                        "reward": breakdown.to_dict(),
                        "transcript": serialize_trajectory(trajectory),
                    },
                )
            else:
                self._error(404, "bad_request", f"unknown endpoint: {self.path}")
        except UnknownInstance as exc:
            self._error(404, "unknown_instance", str(exc))
        except SessionClosed as exc:
            self._error(409, "session_closed", str(exc))
        except EpisodeStillActive as exc:
            self._error(409, "episode_still_active", str(exc))
        except (BackendError, InvariantViolation) as exc:
            self._error(502, "backend_error", str(exc))


class _BoundedThreadingHTTPServer(ThreadingHTTPServer):
    """ThreadingHTTPServer with a cap on in-flight request threads."""

    daemon_threads = True

    def __init__(self, address, handler, max_connections: int):
        super().__init__(address, handler)
        self._gate = threading.BoundedSemaphore(max_connections)

    def process_request(self, request, client_address):
        self._gate.acquire()
        try:
            super().process_request(request, client_address)
        except BaseException:
            self._gate.release()
            raise

    def process_request_thread(self, request, client_address):
        try:
            super().process_request_thread(request, client_address)
        finally:
            self._gate.release()


def make_http_server(
    runner: MockToolEnvironment,
    host: str = "127.0.0.1",
    port: int = 0,
    weights: RewardWeights = RewardWeights(),
    judge: Backend | None = None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP service wrapping a runner."""
    handler = type(
        "BoundEnvHandler",
        (_EnvRequestHandler,),
        {"runner": runner, "weights": weights, "judge": judge},
    )
    return _BoundedThreadingHTTPServer(
        (host, port), handler, runner.config.max_connections
    )


def serve(
    instances: Iterable[AugmentedInstance],
    config: EnvConfig = EnvConfig(),
    host: str = "127.0.0.1",
    port: int = 8080,
    weights: RewardWeights = RewardWeights(),
    judge: Backend | None = None,
) -> ThreadingHTTPServer:
    runner = MockToolEnvironment(instances, config)
    return make_http_server(runner, host, port, weights, judge)
