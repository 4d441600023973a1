"""``skirmish`` command-line interface."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..combat.scenario import load_scenario_config
from ..env.core import EnvConfig
from ..errors import SkirmishError
from ..script.library import BUILTIN_NAMES, builtin_source, load_script
from ..script.parser import ScriptError, parse_script
from .policies import parse_policy
from .protocol import (DEFAULT_BLACKBOX_EPISODES, ExperimentConfig, OpponentSpec, blackbox_eval,
                       results_dir, run_eval)
from .replay import read_replay, render_replay, verify_replay, write_replay
from .rollout import run_episode


def _emit(report, out: str | None, stem: str) -> None:
    sys.stdout.write(report.table())
    d = results_dir(out)
    if d is not None:
        paths = report.write(d, stem)
        print(f"wrote {', '.join(str(p) for p in paths.values())}")


def cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config).__dict__ if args.config else {}
    cfg = dict(cfg)
    for key in ("policy", "n_eval_episodes", "n_seeds", "smoothing", "seed_base", "output_dir"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if args.scenario:
        cfg["scenarios"] = args.scenario
    if args.opponent:
        cfg["opponent"] = OpponentSpec.parse(args.opponent)
    if "scenarios" not in cfg:
        raise SkirmishError("no scenarios given (use --config or --scenario)")
    exp = ExperimentConfig(**cfg)
    out, exp.output_dir = exp.output_dir, None
    report = run_eval(exp)
    _emit(report, out, "run")
    return 0


def cmd_eval_blackbox(args) -> int:
    report = blackbox_eval(args.model, args.train_opponent, args.test_opponent or [],
                           args.scenario, n_episodes=args.episodes, n_seeds=args.seeds,
                           seed_base=args.seed_base)
    _emit(report, args.output_dir, "blackbox")
    return 0


def cmd_rollout(args) -> int:
    p1 = parse_policy(args.p1)
    scen = load_scenario_config(args.scenario)
    if args.p2:
        p2 = parse_policy(args.p2)
        env_cfg = EnvConfig(scen, mode="self_play")
    else:
        p2 = None
        env_cfg = EnvConfig(scen, opponent_mixture=OpponentSpec.parse(args.opponent).mixture())
    result, log = run_episode(env_cfg, p1, p2, args.seed, record=args.replay is not None)
    print(json.dumps(result.to_dict()))
    if args.replay:
        write_replay(log, args.replay)
        print(f"replay written to {args.replay}")
    return 0


def cmd_render_replay(args) -> int:
    log = read_replay(args.path)
    if args.verify:
        ok = verify_replay(log)
        print(f"re-simulation: {'ok' if ok else 'MISMATCH'}")
        if not ok:
            return 1
    sys.stdout.write(render_replay(log, every=args.every, cell=args.cell))
    return 0


def cmd_scripts(args) -> int:
    if args.action == "list":
        for name in BUILTIN_NAMES:
            first = builtin_source(name).text.strip().splitlines()[0]
            print(f"{name:24s} {first}")
        return 0
    status = 0
    for ref in args.files:
        try:
            if ref in BUILTIN_NAMES:
                load_script(ref)
            else:
                parse_script(Path(ref).read_text(), name=Path(ref).stem)
            print(f"{ref}: ok")
        except ScriptError as exc:
            print(f"{ref}:{exc.line}:{exc.column}: {exc.detail}")
            status = 1
        except OSError as exc:
            print(f"{ref}: {exc.strerror}")
            status = 1
    return status


def cmd_train(args) -> int:
    from ..learner.train import LearnerConfig, train

    lc = LearnerConfig.from_dict(json.loads(Path(args.learner_config).read_text())) \
        if args.learner_config else LearnerConfig()
    overrides = {k: getattr(args, k) for k in ("total_steps", "eval_interval", "eval_episodes")
                 if getattr(args, k) is not None}
    if args.vdn:
        overrides["use_vdn"] = True
    if overrides:
        lc = LearnerConfig.from_dict({**lc.to_dict(), **overrides})
    scen = load_scenario_config(args.scenario)
    env_cfg = EnvConfig(scen, opponent_mixture=OpponentSpec.parse(args.opponent).mixture())
    result = train(env_cfg, lc, seed=args.seed, model_path=args.out)
    curve = result.curve
    for step, raw, sm in zip(curve.steps, curve.win_rates, curve.smoothed()):
        print(f"step {step:>8d}  win_rate {raw:.4f}  smoothed {sm:.4f}")
    print(f"model written to {args.out}")
    return 0


def cmd_scriptgen(args) -> int:
    from ..scriptgen.cli import run_from_args

    return run_from_args(args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="skirmish", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config and print the win-rate table")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--scenario", action="append", help="scenario name or file (repeatable)")
    p.add_argument("--policy", help="policy under test: script:<ref>, model:<path> or builtin name")
    p.add_argument("--opponent", help="opponent scripts joined by '+', or selfplay:<policy>")
    p.add_argument("--n-eval-episodes", dest="n_eval_episodes", type=int)
    p.add_argument("--n-seeds", dest="n_seeds", type=int)
    p.add_argument("--smoothing", type=float)
    p.add_argument("--seed-base", dest="seed_base", type=int)
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval-blackbox", help="evaluate a frozen model against unseen opponents")
    p.add_argument("model", help="model file written by `train`")
    p.add_argument("--train-opponent", default="attack_nearest")
    p.add_argument("--test-opponent", action="append", help="opponent spec (repeatable)")
    p.add_argument("--scenario", help="defaults to the model's scenario")
    p.add_argument("--episodes", type=int, default=DEFAULT_BLACKBOX_EPISODES)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_eval_blackbox)

    p = sub.add_parser("rollout", help="play one episode, optionally recording a replay")
    p.add_argument("--scenario", required=True)
    p.add_argument("--p1", default="attack_nearest", help="player-1 policy")
    p.add_argument("--p2", help="player-2 policy (self-play); default is the scripted opponent")
    p.add_argument("--opponent", default="attack_nearest+attack_weakest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replay", help="write a JSON-lines replay here")
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("render-replay", help="print an ASCII storyboard of a replay")
    p.add_argument("path")
    p.add_argument("--every", type=int, default=1, help="frame interval in steps")
    p.add_argument("--cell", type=float, default=1.0, help="map units per character")
    p.add_argument("--verify", action="store_true", help="re-simulate before rendering")
    p.set_defaults(func=cmd_render_replay)

    p = sub.add_parser("scripts", help="list built-in scripts or check DSL files")
    p.add_argument("action", choices=("list", "check"))
    p.add_argument("files", nargs="*")
    p.set_defaults(func=cmd_scripts)

    p = sub.add_parser("train", help="train the tabular Q-learner")
    p.add_argument("--scenario", required=True)
    p.add_argument("--opponent", default="attack_nearest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--learner-config", help="learner config JSON")
    p.add_argument("--total-steps", type=int)
    p.add_argument("--eval-interval", type=int)
    p.add_argument("--eval-episodes", type=int)
    p.add_argument("--vdn", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("scriptgen", help="generate an opponent script with a planner/coder/critic loop")
    from ..scriptgen.cli import add_arguments

    add_arguments(p)
    p.set_defaults(func=cmd_scriptgen)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SkirmishError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
