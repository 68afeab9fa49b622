"""Self-evolving base-trajectory generation.

Each round samples an in-context exemplar and fresh diversity elements,
prompts the generator once, validates the candidate through all three
checkers, and inserts it into the seed pool unless its normalized call
signature is already present. Newly accepted members immediately become
candidates for exemplar sampling, which is what makes the pool self-evolving.
"""

from __future__ import annotations

import hashlib
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import transcript
from .backends import Backend
from .errors import (
    BackendError,
    BudgetExhausted,
    EmptyCatalog,
    EmptyPool,
    GeneratorUnavailable,
    InvariantViolation,
)
from .model import BaseInstance, canonical_call_signature, parse_instance, serialize_instance
from .prompts import build_generation_prompt
from .validation import Stage, ValidationResult, validate_full


class SeedPool:
    """Validated instances plus an index of their oracle-call signatures.

    Mutation is serialized internally; everything stored is an immutable
    value, so concurrent readers need no coordination. An optional capacity
    evicts oldest-first.
    """

    def __init__(self, members=(), capacity: int | None = None):
        self._lock = threading.Lock()
        self.capacity = capacity
        self.members: list[BaseInstance] = []
        self.signature_index: set[str] = set()
        for m in members:
            self.insert(m)

    def __len__(self) -> int:
        return len(self.members)

    def insert(self, instance: BaseInstance) -> bool:
        signature = canonical_call_signature(instance.oracle_call)
        with self._lock:
            if signature in self.signature_index:
                return False
            self.members.append(instance)
            self.signature_index.add(signature)
            if self.capacity is not None and len(self.members) > self.capacity:
                evicted = self.members.pop(0)
                self.signature_index.discard(
                    canonical_call_signature(evicted.oracle_call)
                )
            return True

    def snapshot(self) -> list[BaseInstance]:
        with self._lock:
            return list(self.members)

    @classmethod
    def load(cls, path, capacity: int | None = None) -> "SeedPool":
        pool = cls(capacity=capacity)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                instance = parse_instance(line)
                if not isinstance(instance, BaseInstance):
                    raise InvariantViolation("seed pool files hold base records only")
                pool.insert(instance)
        return pool

    def dump(self) -> str:
        return "".join(serialize_instance(m) + "\n" for m in self.snapshot())


@dataclass(frozen=True)
class DiversityElements:
    domain: str
    param_kinds: tuple[str, ...]
    param_count: int
    behavior: str

    def __post_init__(self):
        object.__setattr__(self, "param_kinds", tuple(self.param_kinds))
        if self.param_count < 1:
            raise InvariantViolation("param_count must be >= 1")
        if not self.param_kinds:
            raise InvariantViolation("param_kinds must be non-empty")


@dataclass(frozen=True)
class DiversityCatalog:
    """Heterogeneous prompt elements, one list per dimension."""

    domains: tuple[str, ...]
    param_kinds: tuple[str, ...]
    param_counts: tuple[int, ...]
    behaviors: tuple[str, ...]

    def __post_init__(self):
        for dim in ("domains", "param_kinds", "param_counts", "behaviors"):
            if not getattr(self, dim):
                raise EmptyCatalog(f"diversity catalog dimension is empty: {dim}")

    @classmethod
    def load(cls, directory) -> "DiversityCatalog":
        directory = Path(directory)

        def lines(name):
            path = directory / name
            if not path.exists():
                raise EmptyCatalog(f"missing catalog file: {path}")
            return tuple(
                ln.strip() for ln in path.read_text("utf-8").splitlines() if ln.strip()
            )

        return cls(
            domains=lines("domains.txt"),
            param_kinds=lines("param_kinds.txt"),
            param_counts=tuple(int(x) for x in lines("param_counts.txt")),
            behaviors=lines("behaviors.txt"),
        )


def derive_seed(master_seed: int, *parts) -> int:
    """Stable, well-mixed per-use RNG seed derived from a master seed."""
    text = ":".join([str(master_seed), *map(str, parts)])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def sample_round_inputs(
    pool: SeedPool, catalog: DiversityCatalog, rng_seed: int
) -> tuple[BaseInstance, DiversityElements]:
    """Uniform, seed-deterministic draw of one exemplar and one element per
    diversity dimension."""
    members = pool.snapshot()
    if not members:
        raise EmptyPool("cannot sample from an empty seed pool")
    rng = random.Random(rng_seed)
    exemplar = members[rng.randrange(len(members))]
    param_count = catalog.param_counts[rng.randrange(len(catalog.param_counts))]
    elems = DiversityElements(
        domain=catalog.domains[rng.randrange(len(catalog.domains))],
        param_kinds=tuple(
            catalog.param_kinds[rng.randrange(len(catalog.param_kinds))]
            for _ in range(param_count)
        ),
        param_count=param_count,
        behavior=catalog.behaviors[rng.randrange(len(catalog.behaviors))],
    )
    return exemplar, elems


def compose_generation_prompt(exemplar: BaseInstance, elems: DiversityElements) -> str:
    return build_generation_prompt(
        exemplar_transcript=transcript.render_transcript(exemplar),
        domain=elems.domain,
        param_kinds=elems.param_kinds,
        param_count=elems.param_count,
        behavior=elems.behavior,
    )


@dataclass(frozen=True)
class RoundOutcome:
    accepted: bool
    duplicate: bool = False
    rejection_stage: Stage | None = None
    diagnostics: tuple[str, ...] = ()
    domain: str = ""
    exemplar_id: str = ""
    instance_id: str | None = None
    signature: str | None = None


def run_generation_round(
    pool: SeedPool,
    catalog: DiversityCatalog,
    generator: Backend,
    judge: Backend,
    *,
    rng_seed: int,
    instance_id: str,
    max_judge_retries: int = 3,
    semantic_template: str | None = None,
    reject_log: list | None = None,
) -> RoundOutcome:
    """One generation round: sample, prompt, validate, dedup-insert.

    Rejected candidates are appended to reject_log (when given) as records of
    {candidate, stage, diagnostics}.
    """
    exemplar, elems = sample_round_inputs(pool, catalog, rng_seed)
    prompt = compose_generation_prompt(exemplar, elems)
    try:
        candidate = generator.complete(prompt)
    except BackendError as exc:
        raise GeneratorUnavailable(f"generator failed: {exc}") from exc

    result: ValidationResult = validate_full(
        candidate,
        judge=judge,
        instance_id=instance_id,
        require_single_tool=True,
        max_judge_retries=max_judge_retries,
        semantic_template=semantic_template,
    )
    if not result.accepted:
        if reject_log is not None:
            reject_log.append(
                {
                    "record_type": "rejection",
                    "candidate": candidate,
                    "stage": result.rejection_stage.value,
                    "diagnostics": list(result.diagnostics),
                }
            )
        return RoundOutcome(
            accepted=False,
            rejection_stage=result.rejection_stage,
            diagnostics=result.diagnostics,
            domain=elems.domain,
            exemplar_id=exemplar.id,
        )
    instance = result.instance
    inserted = pool.insert(instance)
    return RoundOutcome(
        accepted=inserted,
        duplicate=not inserted,
        domain=elems.domain,
        exemplar_id=exemplar.id,
        instance_id=instance.id if inserted else None,
        signature=canonical_call_signature(instance.oracle_call),
    )


@dataclass
class GenerationStats:
    rounds: int = 0
    accepted: int = 0
    duplicates: int = 0
    rejections_by_stage: dict = field(default_factory=dict)
    domains: dict = field(default_factory=dict)
    round_log: list = field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.rounds if self.rounds else 0.0

    def record(self, round_index: int, seed: int, outcome: RoundOutcome) -> None:
        self.rounds += 1
        if outcome.accepted:
            self.accepted += 1
            self.domains[outcome.domain] = self.domains.get(outcome.domain, 0) + 1
        elif outcome.duplicate:
            self.duplicates += 1
        elif outcome.rejection_stage is not None:
            stage = outcome.rejection_stage.value
            self.rejections_by_stage[stage] = self.rejections_by_stage.get(stage, 0) + 1
        self.round_log.append(
            {
                "round": round_index,
                "seed": seed,
                "domain": outcome.domain,
                "exemplar_id": outcome.exemplar_id,
                "accepted": outcome.accepted,
                "duplicate": outcome.duplicate,
                "stage": outcome.rejection_stage.value if outcome.rejection_stage else None,
                "instance_id": outcome.instance_id,
            }
        )

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "accepted": self.accepted,
            "duplicates": self.duplicates,
            "acceptance_rate": self.acceptance_rate,
            "rejections_by_stage": dict(sorted(self.rejections_by_stage.items())),
            "domains": dict(sorted(self.domains.items())),
            "round_log": self.round_log,
        }


def run_generation(
    pool: SeedPool,
    catalog: DiversityCatalog,
    generator: Backend,
    judge: Backend,
    *,
    target_count: int,
    max_rounds: int,
    master_seed: int = 0,
    id_prefix: str = "gen",
    max_judge_retries: int = 3,
    semantic_template: str | None = None,
    reject_log: list | None = None,
) -> GenerationStats:
    """Grow the pool to target_count or exhaust max_rounds trying.

    Raises BudgetExhausted (with stats attached) if the budget runs out; the
    partially grown pool is left intact for the caller to persist.
    """
    if target_count <= len(pool):
        raise InvariantViolation("target_count must exceed the current pool size")
    stats = GenerationStats()
    round_index = 0
    while len(pool) < target_count:
        if round_index >= max_rounds:
            raise BudgetExhausted(
                f"pool at {len(pool)}/{target_count} after {max_rounds} rounds",
                stats=stats,
            )
        seed = derive_seed(master_seed, "round", round_index)
        outcome = run_generation_round(
            pool,
            catalog,
            generator,
            judge,
            rng_seed=seed,
            instance_id=f"{id_prefix}-{stats.accepted + 1:05d}",
            max_judge_retries=max_judge_retries,
            semantic_template=semantic_template,
            reject_log=reject_log,
        )
        stats.record(round_index, seed, outcome)
        round_index += 1
    return stats
