"""Command-line surface binding the pipeline stages together.

Subcommands: generate | validate | augment | reward | serve-env | stats.
Exit codes: 0 success, 1 usage, 2 data error, 3 backend error. Every path
runs fully offline when the configured backends are scripted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import augment as aug
from . import dataio, environment, generation, reward, transcript, validation
from .backends import Backend
from .config import build_backend, load_config
from .errors import (
    BackendError,
    BudgetExhausted,
    DataError,
    InvariantViolation,
    JudgeUnavailable,
    ToolGymError,
)
from .model import (
    AugmentedInstance,
    BaseInstance,
    CapabilityFamily,
    CapabilityLabel,
    KnobSettings,
    VerifierMetadata,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3

DEFAULT_SEED_POOL = Path(__file__).parent / "data" / "seed_pool.jsonl"
DEFAULT_DIVERSITY_DIR = Path(__file__).parent / "data" / "diversity"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_backends(config: dict) -> dict[str, Backend | None]:
    blocks = config.get("backends", {})
    return {name: build_backend(blocks.get(name)) for name in
            ("generator", "judge", "rewriter", "distractor_generator")}


def _weights(config: dict) -> reward.RewardWeights:
    block = config.get("reward", {}).get("weights", {})
    return reward.RewardWeights(
        lambda_fmt=float(block.get("lambda_fmt", 0.2)),
        lambda_cor=float(block.get("lambda_cor", 0.8)),
    )


def as_environment_instance(inst) -> AugmentedInstance:
    """Wrap a base record as an identity-augmented instance so generated
    pools can be served directly."""
    if isinstance(inst, AugmentedInstance):
        return inst
    return AugmentedInstance(
        id=inst.id,
        base_id=inst.id,
        system_prompt=inst.system_prompt,
        user_query=inst.user_query,
        tools=inst.tools,
        tool_output_plan=inst.oracle_output,
        oracle_call=inst.oracle_call,
        oracle_answer=inst.oracle_answer,
        meta=VerifierMetadata.for_label(
            CapabilityLabel(CapabilityFamily.QUERY_REWRITE)
        ),
        knobs=KnobSettings(),
        oracle_steps=inst.oracle_steps,
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    config = load_config(args.config) if args.config else {}
    block = config.get("generate", {})
    seed_pool_path = Path(args.seed_pool or block.get("seed_pool") or DEFAULT_SEED_POOL)
    diversity_dir = Path(args.diversity_dir or block.get("diversity_dir") or DEFAULT_DIVERSITY_DIR)
    if not seed_pool_path.exists():
        raise DataError(f"seed fixture not found: {seed_pool_path}")
    backends = _load_backends(config)
    generator, judge = backends["generator"], backends["judge"]
    if generator is None or judge is None:
        raise DataError("generate requires generator and judge backends in config")

    pool = generation.SeedPool.load(seed_pool_path)
    catalog = generation.DiversityCatalog.load(diversity_dir)
    target = args.target_count or int(block.get("target_count", len(pool) + 10))
    max_rounds = args.max_rounds or int(block.get("max_rounds", target * 20))
    master_seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    out = Path(args.out or block.get("out", "pool.jsonl"))
    stats_out = Path(args.stats_out or block.get("stats", "generation_stats.json"))

    reject_log: list = []
    exhausted = None
    try:
        stats = generation.run_generation(
            pool, catalog, generator, judge,
            target_count=target, max_rounds=max_rounds, master_seed=master_seed,
            semantic_template=config.get("prompts", {}).get("semantic_checker"),
            reject_log=reject_log,
        )
    except BudgetExhausted as exc:
        stats, exhausted = exc.stats, exc
    dataio.atomic_write_text(out, pool.dump())
    dataio.write_json(stats_out, stats.to_dict())
    reject_path = args.reject_log or block.get("reject_log")
    if reject_path:
        dataio.write_jsonl(reject_path, reject_log)
    print(json.dumps({
        "pool_size": len(pool),
        "accepted": stats.accepted,
        "rounds": stats.rounds,
        "acceptance_rate": stats.acceptance_rate,
        "out": str(out),
    }))
    if exhausted is not None:
        print(f"error: {exhausted}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def cmd_validate(args) -> int:
    config = load_config(args.config) if args.config else {}
    judge = _load_backends(config)["judge"] if args.semantic else None
    if args.semantic and judge is None:
        raise DataError("--semantic requires a judge backend in config")
    instances = dataio.read_instances(args.file)
    bases = {i.id: i for i in instances if isinstance(i, BaseInstance)}
    failures = 0
    for inst in instances:
        problems: list[str] = []
        for step in inst.oracle_steps:
            for call in step.calls:
                spec = inst.tool(call.tool_name)
                problems.extend(validation.check_rules(call, spec).diagnostics)
        if isinstance(inst, AugmentedInstance) and inst.base_id in bases:
            try:
                aug.verify_augmented(bases[inst.base_id], inst)
            except DataError as exc:
                problems.append(str(exc))
        if judge is not None and isinstance(inst, BaseInstance):
            report = validation.check_semantic(
                transcript.oracle_trajectory(inst),
                inst,
                judge,
                template_path=config.get("prompts", {}).get("semantic_checker"),
            )
            problems.extend(report.diagnostics)
        status = "FAIL" if problems else "PASS"
        if problems:
            failures += 1
        print(f"{status} {inst.id}" + (f" :: {'; '.join(problems)}" if problems else ""))
    print(f"validated {len(instances)} records, {failures} failures")
    return EXIT_DATA if failures else EXIT_OK


def cmd_augment(args) -> int:
    config = load_config(args.config) if args.config else {}
    block = config.get("augment", {})
    plan_path = Path(args.plan or block.get("plan", "plan.json"))
    if not plan_path.exists():
        raise DataError(f"augmentation plan not found: {plan_path}")
    plan = aug.AugmentPlan.from_dict(json.loads(plan_path.read_text("utf-8")))
    pool_path = Path(args.pool or block.get("pool", "pool.jsonl"))
    if not pool_path.exists():
        raise DataError(f"pool file not found: {pool_path}")
    bases = [i for i in dataio.read_instances(pool_path) if isinstance(i, BaseInstance)]
    backends = _load_backends(config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    out = Path(args.out or block.get("out", "augmented.jsonl"))

    results, issues = aug.augment_batch(
        bases,
        plan,
        rng_seed=seed,
        backends=aug.AugmentBackends(
            rewriter=backends["rewriter"] or backends["generator"],
            judge=backends["judge"],
            distractor_generator=backends["distractor_generator"] or backends["generator"],
        ),
    )
    dataio.write_instances(out, results)
    if args.issues_out:
        dataio.write_jsonl(
            args.issues_out,
            [{"family": i.family.value, "base_id": i.base_id, "message": i.message}
             for i in issues],
        )
    print(json.dumps({"records": len(results), "issues": len(issues), "out": str(out)}))
    return EXIT_OK


def cmd_reward(args) -> int:
    config = load_config(args.config) if args.config else {}
    weights = _weights(config)
    judge = _load_backends(config)["judge"]
    answer_mode = args.answer_mode or config.get("reward", {}).get("answer_mode", "auto")
    judge_templates = config.get("prompts", {}).get("judge")
    instances = {i.id: as_environment_instance(i)
                 for i in dataio.read_instances(args.instances)}
    records = []
    for instance_id, trajectory in dataio.read_trajectories(args.trajectories):
        if instance_id not in instances:
            raise DataError(f"trajectory references unknown instance: {instance_id}")
        try:
            breakdown = reward.score(
                trajectory, instances[instance_id], weights, judge,
                answer_mode=answer_mode, judge_templates=judge_templates,
            )
        except JudgeUnavailable as exc:
            records.append({"instance_id": instance_id, "invalid": True,
                            "error": str(exc)})
            continue
        records.append({"instance_id": instance_id, **breakdown.to_dict()})
    if args.out:
        dataio.write_jsonl(args.out, records)
    for rec in records:
        print(json.dumps(rec, ensure_ascii=False))
    return EXIT_OK


def cmd_serve_env(args) -> int:
    config = load_config(args.config) if args.config else {}
    block = config.get("env", {})
    env_config = environment.EnvConfig(
        max_turns=args.max_turns or int(block.get("max_turns", 6)),
        generic_error_text=block.get("generic_error_text", environment.DEFAULT_GENERIC_ERROR),
        session_ttl=float(block.get("session_ttl", 3600.0)),
        max_connections=int(block.get("max_connections", 64)),
    )
    instances = [as_environment_instance(i) for i in dataio.read_instances(args.dataset)]
    server = environment.serve(
        instances, env_config,
        host=args.host, port=args.port,
        weights=_weights(config), judge=_load_backends(config)["judge"],
    )
    host, port = server.server_address[:2]
    print(f"serving {len(instances)} instances on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def cmd_stats(args) -> int:
    instances = dataio.read_instances(args.file)
    families: dict[str, int] = {}
    knob_hist: dict[str, dict[str, int]] = {}
    tool_counts: dict[str, int] = {}
    base_count = aug_count = 0
    for inst in instances:
        if isinstance(inst, BaseInstance):
            base_count += 1
            name = inst.oracle_call.tool_name
            tool_counts[name] = tool_counts.get(name, 0) + 1
            continue
        aug_count += 1
        family = inst.meta.label.family.value
        families[family] = families.get(family, 0) + 1
        for knob, value in (
            ("n_distractors", inst.knobs.n_distractors),
            ("overlap", inst.knobs.overlap.value),
            ("indirection_level", inst.knobs.indirection_level.value),
            ("format_family", inst.knobs.format_family.value),
            ("noise_length", inst.knobs.noise_length),
            ("error_mode", inst.knobs.error_mode.value if inst.knobs.error_mode else None),
            ("failure_type", inst.knobs.failure_type.value if inst.knobs.failure_type else None),
        ):
            if value in (None, 0) or value in ("low", "direct", "plain"):
                continue  # default knobs stay out of the histogram
            bucket = knob_hist.setdefault(knob, {})
            bucket[str(value)] = bucket.get(str(value), 0) + 1
    summary = {
        "records": len(instances),
        "base": base_count,
        "augmented": aug_count,
        "families": dict(sorted(families.items())),
        "knobs": {k: dict(sorted(v.items())) for k, v in sorted(knob_hist.items())},
        "base_tool_coverage": dict(sorted(tool_counts.items())),
    }
    if args.out:
        dataio.write_json(args.out, summary)
    print(json.dumps(summary, ensure_ascii=False, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="toolgym", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="grow a validated seed pool")
    p.add_argument("--config")
    p.add_argument("--seed-pool")
    p.add_argument("--diversity-dir")
    p.add_argument("--target-count", type=int)
    p.add_argument("--max-rounds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--stats-out")
    p.add_argument("--reject-log")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="re-check a dataset file")
    p.add_argument("--file", required=True)
    p.add_argument("--config")
    p.add_argument("--semantic", action="store_true",
                   help="also run the judge over base records")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("augment", help="apply an augmentation plan to a pool")
    p.add_argument("--config")
    p.add_argument("--pool")
    p.add_argument("--plan")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--issues-out")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("reward", help="score trajectory files against instances")
    p.add_argument("--instances", required=True)
    p.add_argument("--trajectories", required=True)
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--answer-mode", choices=["auto", "exact", "containment"])
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("serve-env", help="run the mock rollout environment")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--max-turns", type=int)
    p.set_defaults(func=cmd_serve_env)

    p = sub.add_parser("stats", help="summarize a dataset file")
    p.add_argument("--file", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (BackendError,) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (DataError, InvariantViolation, BudgetExhausted, ToolGymError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
