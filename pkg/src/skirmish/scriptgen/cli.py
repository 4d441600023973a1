"""Arguments and entry point for ``skirmish scriptgen``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..combat.scenario import load_scenario_config
from .loop import DEFAULT_REPAIR_ROUNDS, DEFAULT_TOL, DEFAULT_WINDOW, refine_loop
from .mock import mock_provider
from .provider import DEFAULT_API_KEY_ENV, DecodingParams, HTTPProvider


def add_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, help="scenario name or file")
    p.add_argument("--provider", choices=("mock", "http"), default="mock")
    p.add_argument("--endpoint", help="chat-completion URL (http provider)")
    p.add_argument("--model", default="default", help="model name sent to the endpoint")
    p.add_argument("--api-key-env", default=DEFAULT_API_KEY_ENV,
                   help="environment variable holding the bearer credential")
    p.add_argument("--max-iters", type=int, default=10)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--episodes", type=int, default=32, help="simulation episodes per iteration")
    p.add_argument("--repair-rounds", type=int, default=DEFAULT_REPAIR_ROUNDS)
    p.add_argument("--max-tokens", type=int, default=1024)
    p.add_argument("--temperature", type=float, default=0.2)
    p.add_argument("--transcript", help="write all prompts and responses here (JSON lines)")
    p.add_argument("--out", help="write the accepted opponent script here")


def run_from_args(args) -> int:
    if args.provider == "http":
        if not args.endpoint:
            print("error: --endpoint is required with --provider http", file=sys.stderr)
            return 2
        provider = HTTPProvider(args.endpoint, args.model, args.api_key_env)
    else:
        provider = mock_provider()
    scenario = load_scenario_config(args.scenario)
    result = refine_loop(provider, scenario, args.max_iters, args.window, args.tol,
                         episodes=args.episodes, rounds=args.repair_rounds,
                         decoding=DecodingParams(args.max_tokens, args.temperature),
                         transcript_path=args.transcript)
    for it, p1, p2 in result.state.history:
        print(f"iteration {it}: red {p1:.4f}  blue {p2:.4f}")
    print("converged" if result.converged else "not converged (stopped at max_iters)")
    print(f"smoke rollout: {result.smoke.episodes} episodes, blue win rate {result.smoke.p2_win_rate:.4f}")
    if args.out:
        Path(args.out).write_text(result.script.text)
        print(f"script written to {args.out}")
    else:
        sys.stdout.write(result.script.text)
    return 0
