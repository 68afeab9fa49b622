"""Oracle-preserving augmentation operators.

Each operator perturbs environmental components (system prompt, user query,
tool set, planned tool output) of a single-oracle base instance while leaving
the oracle call untouched, and the oracle answer too for exact-verifiable
families. Operators are pure given (base, knobs, rng_seed) and scripted
backends, so batch runs are replayable byte-for-byte.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Mapping, Protocol, Sequence

from .backends import Backend, parse_binary_verdict
from .errors import (
    BackendError,
    DataError,
    InsufficientDistractors,
    InvariantViolation,
    MissingParamsInapplicable,
    ParseError,
    PreservationError,
    RewriteFailed,
    WrongContentInapplicable,
)
from .generation import derive_seed
from .model import (
    AugmentedInstance,
    BaseInstance,
    CapabilityFamily,
    CapabilityLabel,
    ErrorMode,
    FailureType,
    FormatFamily,
    IndirectionLevel,
    KnobSettings,
    Overlap,
    ToolSpec,
    Verifier,
    VerifierMetadata,
    canonical_call_signature,
    canonical_value,
)
from .prompts import (
    build_distractor_prompt,
    build_rewrite_prompt,
    build_rewrite_verify_prompt,
    render_system_prompt,
    tool_from_wire,
)

MISLEADING_CONTEXT = (
    "\n\nNote: tool availability fluctuates; some listed functions may be "
    "deprecated, renamed, or unrelated to the current task."
)

FAILURE_MESSAGES = (
    "Connection error",
    "Error: request timed out after 30 seconds.",
    "HTTP 500: internal server error.",
    "Error: rate limit exceeded. Retry later.",
    "Error: authentication failed for the requested service.",
)

_FAMILY_SLUGS = {
    CapabilityFamily.DISTRACTOR_TOOLS: "distractors",
    CapabilityFamily.QUERY_REWRITE: "rewrite",
    CapabilityFamily.MULTI_FORMAT_OUTPUT: "multiformat",
    CapabilityFamily.NOISY_OUTPUT: "noise",
    CapabilityFamily.ERRONEOUS_OUTPUT: "erroneous",
    CapabilityFamily.PROBLEMATIC_QUERY: "problematic",
}


def _aug_id(base: BaseInstance, family: CapabilityFamily) -> str:
    return f"{base.id}:{_FAMILY_SLUGS[family]}"


def _require_single_oracle(base: BaseInstance) -> None:
    if len(base.oracle_steps) != 1 or len(base.oracle_steps[0].calls) != 1:
        raise DataError(
            f"augmentation operates on single-oracle bases; {base.id} has a multi-call plan"
        )


def _system_prompt(base_prompt: str, perturb: bool) -> str:
    return base_prompt + MISLEADING_CONTEXT if perturb else base_prompt


# ---------------------------------------------------------------------------
# Distractor tools
# ---------------------------------------------------------------------------

class DistractorSource(Protocol):
    def propose(
        self, base: BaseInstance, count: int, overlap: Overlap, rng: random.Random
    ) -> list[ToolSpec]: ...


class PoolDistractorSource:
    """Cross-domain sampling: distractors are other instances' real tools."""

    def __init__(self, universe: Sequence[BaseInstance]):
        seen: dict[str, ToolSpec] = {}
        for inst in universe:
            for tool in inst.tools:
                seen.setdefault(tool.name, tool)
        self._tools = [seen[name] for name in sorted(seen)]

    def propose(self, base, count, overlap, rng) -> list[ToolSpec]:
        taken = {t.name for t in base.tools}
        candidates = [t for t in self._tools if t.name not in taken]
        if len(candidates) < count:
            return candidates
        return rng.sample(candidates, count)


class LLMDistractorSource:
    """Same-domain near-misses proposed by a generator backend (used for
    overlap=high). Unparseable or colliding proposals are dropped."""

    def __init__(self, generator: Backend):
        self._generator = generator

    def propose(self, base, count, overlap, rng) -> list[ToolSpec]:
        prompt = build_distractor_prompt(base.tools[0], base.user_query, count)
        reply = self._generator.complete(prompt)
        taken = {t.name for t in base.tools}
        out: list[ToolSpec] = []
        for line in reply.splitlines():
            line = line.strip()
            if not line.startswith("{"):
                continue
            try:
                tool = tool_from_wire(json.loads(line))
            except (json.JSONDecodeError, ParseError, InvariantViolation):
                continue
            if tool.name in taken:
                continue
            taken.add(tool.name)
            out.append(tool)
        return out[:count]


def augment_distractors(
    base: BaseInstance,
    n_distractors: int,
    overlap: Overlap,
    distractor_source: DistractorSource,
    *,
    perturb_system_prompt: bool = False,
) -> AugmentedInstance:
    """Add structurally valid but non-helpful tools; everything else stays."""
    _require_single_oracle(base)
    if n_distractors < 1:
        raise InvariantViolation("n_distractors must be >= 1")
    rng = random.Random(derive_seed(0, "distractors", base.id))
    proposed = distractor_source.propose(base, n_distractors, overlap, rng)
    taken = {t.name for t in base.tools}
    distractors: list[ToolSpec] = []
    for tool in proposed:
        if tool.name in taken:
            continue
        taken.add(tool.name)
        distractors.append(tool)
    if len(distractors) < n_distractors:
        raise InsufficientDistractors(
            f"needed {n_distractors} distractors for {base.id}, got {len(distractors)}"
        )
    tools = list(base.tools) + distractors
    rng.shuffle(tools)
    return AugmentedInstance(
        id=_aug_id(base, CapabilityFamily.DISTRACTOR_TOOLS),
        base_id=base.id,
        system_prompt=_system_prompt(render_system_prompt(tools), perturb_system_prompt),
        user_query=base.user_query,
        tools=tuple(tools),
        tool_output_plan=base.oracle_output,
        oracle_call=base.oracle_call,
        oracle_answer=base.oracle_answer,
        meta=VerifierMetadata.for_label(
            CapabilityLabel(CapabilityFamily.DISTRACTOR_TOOLS)
        ),
        knobs=KnobSettings(
            n_distractors=n_distractors,
            overlap=overlap,
            system_prompt_perturbed=perturb_system_prompt,
        ),
    )


# ---------------------------------------------------------------------------
# Query rewriting
# ---------------------------------------------------------------------------

def augment_query_rewrite(
    base: BaseInstance,
    indirection_level: IndirectionLevel,
    rewriter: Backend | None = None,
    verifier: Backend | None = None,
    *,
    max_retries: int = 3,
    perturb_system_prompt: bool = False,
) -> AugmentedInstance:
    """Rewrite the query at the requested indirection level; a judge must
    confirm the rewrite still uniquely implies the oracle call."""
    _require_single_oracle(base)
    if indirection_level is IndirectionLevel.DIRECT:
        new_query = base.user_query
    else:
        if rewriter is None or verifier is None:
            raise InvariantViolation(
                "indirect rewrites require rewriter and verifier backends"
            )
        prompt = build_rewrite_prompt(
            indirection_level.value, base.tools[0], base.user_query
        )
        verify = None
        last_note = "no attempt succeeded"
        for _ in range(max_retries):
            try:
                candidate = rewriter.complete(prompt).strip()
            except BackendError as exc:
                last_note = f"rewriter error: {exc}"
                continue
            if not candidate:
                last_note = "empty rewrite"
                continue
            verify = build_rewrite_verify_prompt(base.tools, candidate, base.oracle_call)
            try:
                if parse_binary_verdict(verifier.complete(verify)):
                    new_query = candidate
                    break
                last_note = "consistency check rejected the rewrite"
            except BackendError as exc:
                last_note = f"verifier error: {exc}"
        else:
            raise RewriteFailed(
                f"rewrite of {base.id} failed after {max_retries} attempts: {last_note}"
            )
    return AugmentedInstance(
        id=_aug_id(base, CapabilityFamily.QUERY_REWRITE),
        base_id=base.id,
        system_prompt=_system_prompt(base.system_prompt, perturb_system_prompt),
        user_query=new_query,
        tools=base.tools,
        tool_output_plan=base.oracle_output,
        oracle_call=base.oracle_call,
        oracle_answer=base.oracle_answer,
        meta=VerifierMetadata.for_label(CapabilityLabel(CapabilityFamily.QUERY_REWRITE)),
        knobs=KnobSettings(
            indirection_level=indirection_level,
            system_prompt_perturbed=perturb_system_prompt,
        ),
    )


# ---------------------------------------------------------------------------
# Multi-format outputs
# ---------------------------------------------------------------------------

def _render_keyed_fields(payload: str) -> str:
    return f"status: ok\nsource: tool_response\nresult: {payload}"


def _render_tabular(payload: str) -> str:
    return f"field | value\n----- | -----\nstatus | ok\nresult | {payload}"


def _render_log_embedded(payload: str) -> str:
    return (
        "[2024-01-01T00:00:00Z] INFO tool-runtime request dispatched\n"
        f"[2024-01-01T00:00:01Z] INFO tool-runtime payload={payload}\n"
        "[2024-01-01T00:00:02Z] INFO tool-runtime request completed status=200"
    )


_FORMAT_RENDERERS = {
    FormatFamily.PLAIN: lambda payload: payload,
    FormatFamily.KEYED_FIELDS: _render_keyed_fields,
    FormatFamily.TABULAR: _render_tabular,
    FormatFamily.LOG_EMBEDDED: _render_log_embedded,
}

# Scaffolding tokens each template adds around the payload; tests strip these
# to recover the original output's tokens.
FORMAT_SCAFFOLD_TOKENS = {
    FormatFamily.PLAIN: (),
    FormatFamily.KEYED_FIELDS: ("status:", "ok", "source:", "tool_response", "result:"),
    FormatFamily.TABULAR: ("field", "|", "value", "-----", "status", "ok", "result"),
    FormatFamily.LOG_EMBEDDED: (
        "[2024-01-01T00:00:00Z]",
        "[2024-01-01T00:00:01Z]",
        "[2024-01-01T00:00:02Z]",
        "INFO",
        "tool-runtime",
        "request",
        "dispatched",
        "completed",
        "status=200",
        "payload=",
    ),
}


def augment_multiformat(
    base: BaseInstance,
    format_family: FormatFamily,
    *,
    perturb_system_prompt: bool = False,
) -> AugmentedInstance:
    """Re-render the oracle output into a different presentation format via a
    deterministic template; the informational payload stays verbatim."""
    _require_single_oracle(base)
    plan = _FORMAT_RENDERERS[format_family](base.oracle_output)
    return AugmentedInstance(
        id=_aug_id(base, CapabilityFamily.MULTI_FORMAT_OUTPUT),
        base_id=base.id,
        system_prompt=_system_prompt(base.system_prompt, perturb_system_prompt),
        user_query=base.user_query,
        tools=base.tools,
        tool_output_plan=plan,
        oracle_call=base.oracle_call,
        oracle_answer=base.oracle_answer,
        meta=VerifierMetadata.for_label(
            CapabilityLabel(CapabilityFamily.MULTI_FORMAT_OUTPUT)
        ),
        knobs=KnobSettings(
            format_family=format_family,
            system_prompt_perturbed=perturb_system_prompt,
        ),
    )


# ---------------------------------------------------------------------------
# Noisy outputs
# ---------------------------------------------------------------------------

_NOISE_LINES = (
    "System maintenance notification: database optimization routines are currently running.",
    "Cache invalidation sweep completed for {n} entries.",
    "Health check completed at {hh}:{mm} UTC. All subsystems operational.",
    "Telemetry batch {n} flushed to the analytics backend.",
    "Configuration reload applied to worker group {n}.",
    "Background indexing progressed to {p} percent.",
    "Session garbage collection removed {n} stale entries.",
    "Replication lag is {n} ms across the primary cluster.",
    "Security patch bundle {n} verified against the manifest.",
    "Scheduled snapshot {n} archived successfully.",
)


def _noise_line(rng: random.Random) -> str:
    template = _NOISE_LINES[rng.randrange(len(_NOISE_LINES))]
    return template.format(
        n=rng.randrange(1, 10000),
        p=rng.randrange(1, 100),
        hh=f"{rng.randrange(24):02d}",
        mm=f"{rng.randrange(60):02d}",
    )


def augment_noise(
    base: BaseInstance,
    noise_length: int,
    rng_seed: int = 0,
    *,
    perturb_system_prompt: bool = False,
) -> AugmentedInstance:
    """Bury the oracle output inside ~noise_length characters of log-like
    filler; the output itself appears verbatim at a seeded-random position."""
    _require_single_oracle(base)
    if noise_length < 0:
        raise InvariantViolation("noise_length must be >= 0")
    if noise_length == 0:
        plan = base.oracle_output
    else:
        rng = random.Random(derive_seed(rng_seed, "noise", base.id))
        filler: list[str] = []
        total = 0
        while total < noise_length:
            line = _noise_line(rng)
            filler.append(line)
            total += len(line) + 1
        position = rng.randrange(len(filler) + 1)
        filler.insert(position, base.oracle_output)
        plan = "\n".join(filler)
    return AugmentedInstance(
        id=_aug_id(base, CapabilityFamily.NOISY_OUTPUT),
        base_id=base.id,
        system_prompt=_system_prompt(base.system_prompt, perturb_system_prompt),
        user_query=base.user_query,
        tools=base.tools,
        tool_output_plan=plan,
        oracle_call=base.oracle_call,
        oracle_answer=base.oracle_answer,
        meta=VerifierMetadata.for_label(CapabilityLabel(CapabilityFamily.NOISY_OUTPUT)),
        knobs=KnobSettings(
            noise_length=noise_length,
            system_prompt_perturbed=perturb_system_prompt,
        ),
    )


# ---------------------------------------------------------------------------
# Erroneous outputs
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"-?\d+\.\d+|-?\d+")

# Capitalized tokens that are almost certainly not entities.
_CAP_STOPWORDS = frozenset(
    "The A An This That These Those It In On At By For We You I He She They Is Are "
    "Was Were Be Has Have Had Do Does Did Not No Yes And Or But If When Your Our "
    "Its His Her Their My".split()
)
_ENTITY_RE = re.compile(r"\b[A-Z][A-Za-z0-9]+\b")


def _shift_number(token: str) -> str:
    if "." in token:
        whole, frac = token.split(".", 1)
        shifted = int(whole) + 1 if not whole.startswith("-") else int(whole) - 1
        return f"{shifted}.{frac}"
    n = int(token)
    return str(n + 1 if n >= 0 else n - 1)


def _perturb_payload(text: str) -> tuple[str, dict[str, str]] | None:
    """Shift every numeric value, or swap the first two named entities when
    the text has no numbers. None when neither applies."""
    numbers = _NUMBER_RE.findall(text)
    if numbers:
        perturbed = _NUMBER_RE.sub(lambda m: _shift_number(m.group()), text)
        return perturbed, {"numeric_shift": f"{numbers[0]}->{_shift_number(numbers[0])}"}
    entities: list[str] = []
    for token in _ENTITY_RE.findall(text):
        if token in _CAP_STOPWORDS or token in entities:
            continue
        entities.append(token)
    if len(entities) >= 2:
        a, b = entities[0], entities[1]
        marker = "\x00"
        swapped = text.replace(a, marker).replace(b, a).replace(marker, b)
        return swapped, {"entity_swap": f"{a}<->{b}"}
    return None


def augment_erroneous(
    base: BaseInstance,
    error_mode: ErrorMode,
    *,
    template_index: int = 0,
    perturb_system_prompt: bool = False,
) -> AugmentedInstance:
    """Replace the planned output with a failure message, or deterministically
    corrupt its factual payload. The oracle call is kept for the verifier; the
    answer is dropped because the expected behavior changed."""
    _require_single_oracle(base)
    if error_mode is ErrorMode.FAILURE_MESSAGE:
        plan = FAILURE_MESSAGES[template_index % len(FAILURE_MESSAGES)]
        detail = {"failure_text": plan}
    else:
        perturbed = _perturb_payload(base.oracle_output)
        if perturbed is None:
            raise WrongContentInapplicable(
                f"{base.id}: oracle output has no numeric or entity payload to corrupt"
            )
        plan, detail = perturbed
    return AugmentedInstance(
        id=_aug_id(base, CapabilityFamily.ERRONEOUS_OUTPUT),
        base_id=base.id,
        system_prompt=_system_prompt(base.system_prompt, perturb_system_prompt),
        user_query=base.user_query,
        tools=base.tools,
        tool_output_plan=plan,
        oracle_call=base.oracle_call,
        oracle_answer=None,
        meta=VerifierMetadata.for_label(
            CapabilityLabel(CapabilityFamily.ERRONEOUS_OUTPUT, error_mode.value)
        ),
        knobs=KnobSettings(
            error_mode=error_mode,
            system_prompt_perturbed=perturb_system_prompt,
            detail=detail,
        ),
    )


# ---------------------------------------------------------------------------
# Problematic queries
# ---------------------------------------------------------------------------

def _catalog_lines(name: str) -> tuple[str, ...]:
    text = resources.files("toolgym").joinpath(f"data/catalogs/{name}").read_text("utf-8")
    return tuple(ln.strip() for ln in text.splitlines() if ln.strip())


def _content_words(text: str) -> set[str]:
    return {w for w in re.findall(r"[a-z]{4,}", text.lower())}


def _off_domain_query(base: BaseInstance, catalog: tuple[str, ...], rng: random.Random) -> str:
    tool = base.tools[0]
    tool_words = _content_words(tool.name.replace("_", " ") + " " + tool.description)
    order = rng.sample(range(len(catalog)), len(catalog))
    for idx in order:
        if not (_content_words(catalog[idx]) & tool_words):
            return catalog[idx]
    return catalog[order[0]]


def _excise(query: str, value_text: str) -> str | None:
    pattern = re.compile(
        r"(?<![A-Za-z0-9])" + re.escape(value_text) + r"(?![A-Za-z0-9])", re.IGNORECASE
    )
    if not pattern.search(query):
        return None
    stripped = pattern.sub(" ", query)
    stripped = re.sub(r"[ \t]{2,}", " ", stripped).strip()
    if pattern.search(stripped):
        return None
    return stripped


def _remove_param_info(
    base: BaseInstance, rewriter: Backend | None, max_retries: int
) -> tuple[str, str]:
    """Produce a query missing exactly one required argument's information.

    Mechanical excision first (the argument value must appear verbatim in the
    query); a rewriter backend is the fallback for values that are only
    paraphrased. Returns (new_query, removed_param)."""
    tool = base.tools[0]
    removable: list[tuple[str, str]] = []
    for name in tool.required_params:
        if name not in base.oracle_call.arguments:
            continue
        value_text = canonical_value(base.oracle_call.arguments[name]).strip("[]{}")
        if len(value_text) >= 1:
            removable.append((name, value_text))

    for name, value_text in removable:
        stripped = _excise(base.user_query, value_text)
        if stripped is not None and stripped != base.user_query:
            return stripped, name

    if rewriter is not None and removable:
        name, value_text = removable[0]
        prompt = (
            "Restate the request below, dropping every mention of the "
            f"'{name}' detail (currently: {value_text}) while keeping everything "
            f"else.\n\nRequest: {base.user_query}\n\nReply with the restated "
            "request only."
        )
        for _ in range(max_retries):
            try:
                candidate = rewriter.complete(prompt).strip()
            except BackendError:
                continue
            if candidate and value_text.lower() not in candidate.lower():
                return candidate, name
    raise MissingParamsInapplicable(
        f"{base.id}: every required parameter stays inferable from the query"
    )


def augment_problematic(
    base: BaseInstance,
    failure_type: FailureType,
    rewriter: Backend | None = None,
    *,
    rng_seed: int = 0,
    max_retries: int = 3,
    perturb_system_prompt: bool = False,
) -> AugmentedInstance:
    """Swap the query for one the tool cannot or should not serve; the right
    behavior becomes answering directly or asking for clarification."""
    _require_single_oracle(base)
    rng = random.Random(derive_seed(rng_seed, "problematic", failure_type.value, base.id))
    detail: dict[str, str] | None = None
    if failure_type is FailureType.IRRELEVANT:
        new_query = _off_domain_query(base, _catalog_lines("irrelevant_queries.txt"), rng)
    elif failure_type is FailureType.NO_TOOL_NEEDED:
        new_query = _off_domain_query(base, _catalog_lines("no_tool_queries.txt"), rng)
    else:
        new_query, removed = _remove_param_info(base, rewriter, max_retries)
        detail = {"missing_param": removed}
    return AugmentedInstance(
        id=_aug_id(base, CapabilityFamily.PROBLEMATIC_QUERY),
        base_id=base.id,
        system_prompt=_system_prompt(base.system_prompt, perturb_system_prompt),
        user_query=new_query,
        tools=base.tools,
        tool_output_plan=base.oracle_output,
        oracle_call=base.oracle_call,
        oracle_answer=None,
        meta=VerifierMetadata.for_label(
            CapabilityLabel(CapabilityFamily.PROBLEMATIC_QUERY, failure_type.value)
        ),
        knobs=KnobSettings(
            failure_type=failure_type,
            system_prompt_perturbed=perturb_system_prompt,
            detail=detail,
        ),
    )


# ---------------------------------------------------------------------------
# Preservation checks and batch driver
# ---------------------------------------------------------------------------

def verify_augmented(base: BaseInstance, aug: AugmentedInstance) -> None:
    """Assert the oracle-preservation contract before a record is emitted."""
    if canonical_call_signature(aug.oracle_call) != canonical_call_signature(
        base.oracle_call
    ):
        raise PreservationError(f"{aug.id}: oracle call drifted from {base.id}")
    if aug.meta.verifier is Verifier.EXACT:
        if aug.oracle_answer != base.oracle_answer:
            raise PreservationError(f"{aug.id}: oracle answer drifted from {base.id}")
    elif aug.oracle_answer is not None:
        raise PreservationError(f"{aug.id}: judge-assisted record carries an answer")
    base_names = {t.name for t in base.tools}
    aug_names = {t.name for t in aug.tools}
    if not base_names <= aug_names:
        raise PreservationError(f"{aug.id}: a base tool was removed")
    family = aug.meta.label.family
    if family is not CapabilityFamily.DISTRACTOR_TOOLS and aug_names != base_names:
        raise PreservationError(f"{aug.id}: only distractor augmentation may grow the tool set")
    if family in (CapabilityFamily.NOISY_OUTPUT, CapabilityFamily.MULTI_FORMAT_OUTPUT):
        if base.oracle_output not in aug.tool_output_plan:
            raise PreservationError(f"{aug.id}: oracle output not embedded in plan")


@dataclass(frozen=True)
class FamilyPlan:
    """Quota plus knob settings for one family; a knob value given as a list
    means a per-instance seeded choice."""

    quota: int
    knobs: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.quota < 0:
            raise InvariantViolation("quota must be >= 0")
        object.__setattr__(self, "knobs", dict(self.knobs))


@dataclass(frozen=True)
class AugmentPlan:
    families: Mapping[CapabilityFamily, FamilyPlan]

    def __post_init__(self):
        object.__setattr__(self, "families", dict(self.families))

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "AugmentPlan":
        families = {}
        for name, body in raw.items():
            family = CapabilityFamily(name)
            families[family] = FamilyPlan(
                quota=int(body["quota"]), knobs=body.get("knobs", {})
            )
        return cls(families=families)

    def total_quota(self) -> int:
        return sum(p.quota for p in self.families.values())


@dataclass
class AugmentBackends:
    rewriter: Backend | None = None
    judge: Backend | None = None
    distractor_generator: Backend | None = None


@dataclass(frozen=True)
class BatchIssue:
    family: CapabilityFamily
    base_id: str
    message: str


def _resolve_knob(value: Any, rng: random.Random) -> Any:
    if isinstance(value, list):
        return value[rng.randrange(len(value))]
    return value


def _apply_family(
    family: CapabilityFamily,
    base: BaseInstance,
    knobs: Mapping[str, Any],
    rng: random.Random,
    rng_seed: int,
    backends: AugmentBackends,
    pool_source: PoolDistractorSource,
) -> AugmentedInstance:
    perturb = bool(knobs.get("perturb_system_prompt", False))
    if family is CapabilityFamily.DISTRACTOR_TOOLS:
        overlap = Overlap(knobs.get("overlap", "low"))
        if overlap is Overlap.HIGH and backends.distractor_generator is not None:
            source: DistractorSource = LLMDistractorSource(backends.distractor_generator)
        else:
            source = pool_source
        return augment_distractors(
            base,
            int(knobs.get("n_distractors", 2)),
            overlap,
            source,
            perturb_system_prompt=perturb,
        )
    if family is CapabilityFamily.QUERY_REWRITE:
        return augment_query_rewrite(
            base,
            IndirectionLevel(knobs.get("indirection_level", "direct")),
            backends.rewriter,
            backends.judge,
            perturb_system_prompt=perturb,
        )
    if family is CapabilityFamily.MULTI_FORMAT_OUTPUT:
        return augment_multiformat(
            base,
            FormatFamily(knobs.get("format_family", "keyed_fields")),
            perturb_system_prompt=perturb,
        )
    if family is CapabilityFamily.NOISY_OUTPUT:
        return augment_noise(
            base,
            int(knobs.get("noise_length", 400)),
            rng_seed,
            perturb_system_prompt=perturb,
        )
    if family is CapabilityFamily.ERRONEOUS_OUTPUT:
        mode = ErrorMode(knobs.get("error_mode", rng.choice([m.value for m in ErrorMode])))
        index = int(knobs.get("template_index", rng.randrange(len(FAILURE_MESSAGES))))
        return augment_erroneous(
            base, mode, template_index=index, perturb_system_prompt=perturb
        )
    if family is CapabilityFamily.PROBLEMATIC_QUERY:
        failure = FailureType(
            knobs.get("failure_type", rng.choice([t.value for t in FailureType]))
        )
        return augment_problematic(
            base,
            failure,
            backends.rewriter,
            rng_seed=rng_seed,
            perturb_system_prompt=perturb,
        )
    raise AssertionError(f"unhandled family {family}")


def augment_batch(
    bases: Sequence[BaseInstance],
    plan: AugmentPlan,
    *,
    rng_seed: int = 0,
    backends: AugmentBackends | None = None,
) -> tuple[list[AugmentedInstance], list[BatchIssue]]:
    """Apply the plan deterministically: per family, walk a seeded permutation
    of the base pool, resolve knobs, apply the operator, and verify the
    preservation contract before keeping the record. Operator failures are
    collected as issues and the batch keeps going; output order is
    (family, base_id)."""
    backends = backends or AugmentBackends()
    bases = list(bases)
    if not bases:
        raise InvariantViolation("augmentation needs a non-empty base pool")
    if max(p.quota for p in plan.families.values()) > len(bases):
        raise InvariantViolation("a family quota exceeds the base pool size")
    pool_source = PoolDistractorSource(bases)
    results: list[AugmentedInstance] = []
    issues: list[BatchIssue] = []
    for family in sorted(plan.families, key=lambda f: f.value):
        fplan = plan.families[family]
        rng = random.Random(derive_seed(rng_seed, "batch", family.value))
        order = rng.sample(bases, len(bases))
        produced = 0
        for base in order:
            if produced >= fplan.quota:
                break
            knobs = {k: _resolve_knob(v, rng) for k, v in sorted(fplan.knobs.items())}
            try:
                aug = _apply_family(
                    family, base, knobs, rng, rng_seed, backends, pool_source
                )
                verify_augmented(base, aug)
            except (DataError, RewriteFailed, BackendError) as exc:
                issues.append(BatchIssue(family, base.id, str(exc)))
                continue
            results.append(aug)
            produced += 1
        if produced < fplan.quota:
            issues.append(
                BatchIssue(
                    family, "", f"quota shortfall: {produced}/{fplan.quota} produced"
                )
            )
    results.sort(key=lambda a: (a.meta.label.family.value, a.base_id))
    return results, issues
