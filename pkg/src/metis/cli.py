"""Command-line entry point: validate / train / simulate / serve / results.

Exit codes: 0 success, 1 domain error (invalid scenario, bad checkpoint,
missing file), 2 usage error (argparse). The simulate subcommand accepts
stamped fire injections so a steered run can be replayed headlessly.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

from .engine import EndCondition, parse_end_condition, run
from .errors import MetisError
from .rewards import RewardConfig
from .trainer import (
    TrainerConfig,
    load_checkpoint,
    policy_from_checkpoint,
    random_policy,
    save_checkpoint,
    train,
)
from .world import FireSource, load_scenario, validate


def _load_scenario_file(path: str):
    try:
        return load_scenario(Path(path).read_bytes())
    except FileNotFoundError:
        raise MetisError(f"no such file: {path}") from None


def _parse_inject(spec: str) -> tuple[int, FireSource]:
    """TICK:X,Z[:MAX_RADIUS[:GROWTH_RATE[:PATCH_RATE]]]"""
    parts = spec.split(":")
    if len(parts) < 2:
        raise ValueError(f"bad --inject spec: {spec!r}")
    tick = int(parts[0])
    x, z = (float(v) for v in parts[1].split(","))
    source = FireSource(
        origin=(x, z),
        max_radius=float(parts[2]) if len(parts) > 2 else 3.0,
        growth_rate=float(parts[3]) if len(parts) > 3 else 0.25,
        patch_rate=int(parts[4]) if len(parts) > 4 else 3)
    return tick, source


def _split_config(doc: dict) -> tuple[dict, dict]:
    """A flat config document mirrors both dataclasses; field names split it."""
    trainer_keys = {f.name for f in fields(TrainerConfig)}
    reward_keys = {f.name for f in fields(RewardConfig)}
    unknown = set(doc) - trainer_keys - reward_keys
    if unknown:
        raise MetisError(f"unknown config keys: {sorted(unknown)}")
    return ({k: v for k, v in doc.items() if k in trainer_keys},
            {k: v for k, v in doc.items() if k in reward_keys})


def cmd_validate(args) -> int:
    scenario = _load_scenario_file(args.scenario)
    issues = validate(scenario)
    for issue in issues:
        line = issue.code
        if issue.entity:
            line += f" {issue.entity}"
        if issue.detail:
            line += f": {issue.detail}"
        print(line)
    if issues:
        return 1
    print("ok")
    return 0


def cmd_train(args) -> int:
    scenario = _load_scenario_file(args.scenario)
    doc = {}
    if args.config:
        doc = json.loads(Path(args.config).read_text("utf-8"))
    trainer_kw, reward_kw = _split_config(doc)
    trainer_cfg = TrainerConfig(**trainer_kw)
    reward_cfg = RewardConfig(**reward_kw)

    metrics_file = open(args.metrics, "w", encoding="utf-8") if args.metrics else sys.stdout

    def on_metrics(record):
        metrics_file.write(json.dumps(record, sort_keys=True) + "\n")
        metrics_file.flush()

    state = None
    if args.resume:
        state = load_checkpoint(Path(args.resume).read_bytes())
        # explicit --config fields win over the checkpointed configs, so a
        # finished run can be extended by raising total_steps
        state.trainer_config = replace(state.trainer_config, **trainer_kw)
        state.reward_config = replace(state.reward_config, **reward_kw)
    try:
        state, _ = train(scenario, reward_cfg, trainer_cfg, state=state,
                         on_metrics=on_metrics, target_return=args.target_return)
    finally:
        if metrics_file is not sys.stdout:
            metrics_file.close()
    Path(args.out).write_bytes(save_checkpoint(state))
    print(f"checkpoint written to {args.out} after {state.global_step} steps",
          file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    scenario = _load_scenario_file(args.scenario)
    if args.policy:
        policy = policy_from_checkpoint(Path(args.policy).read_bytes())
    else:
        policy = random_policy(seed=args.seed)
    conditions = [parse_end_condition(s) for s in args.end] or None
    injections = [_parse_inject(s) for s in args.inject]
    results, sim = run(scenario, policy, conditions, seed=args.seed,
                       injections=injections)
    if args.log:
        Path(args.log).write_bytes(sim.log_bytes())
    print(json.dumps(results.to_dict(), sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    from .gateway import serve

    serve(addr=args.addr, data_dir=args.data)
    return 0


def cmd_results(args) -> int:
    lines = Path(args.log).read_text("utf-8").splitlines()
    for line in reversed(lines):
        if not line.strip():
            continue
        record = json.loads(line)
        if record.get("kind") == "sim_ended":
            print(json.dumps(record["payload"]["results"], sort_keys=True))
            return 0
    raise MetisError(f"{args.log} has no sim_ended event")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metis",
        description="Building-evacuation simulator: scenario tools, "
                    "curriculum PPO training, deterministic runs, service.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("train", help="train a policy on a scenario")
    p.add_argument("scenario")
    p.add_argument("--config", help="JSON file with trainer/reward fields")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--metrics", help="metrics NDJSON output (default stdout)")
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--target-return", type=float, default=None,
                   help="stop when the 20-episode mean return reaches this")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="run one evacuation headlessly")
    p.add_argument("scenario")
    p.add_argument("--policy", help="checkpoint file (omit for random policy)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--end", action="append", default=[],
                   help="end condition, e.g. count_safe:2 or time_limit:60")
    p.add_argument("--log", help="event log output path")
    p.add_argument("--inject", action="append", default=[],
                   metavar="TICK:X,Z[:MAX_RADIUS[:GROWTH[:PATCH_RATE]]]",
                   help="stamped fire injection (repeatable)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP/WebSocket service")
    p.add_argument("--addr", default="127.0.0.1:8000")
    p.add_argument("--data", default="./metis-data")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("results", help="print final results from an event log")
    p.add_argument("log")
    p.set_defaults(func=cmd_results)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MetisError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
