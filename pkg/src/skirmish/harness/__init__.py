"""Rollouts, evaluation protocol, replays and the command-line interface."""

from .policies import ModelPolicy, Policy, ScriptPolicy, parse_policy
from .protocol import (
    DEFAULT_BLACKBOX_EPISODES, DEFAULT_EVAL_EPISODES, DEFAULT_SEEDS, RESULTS_ENV, Cell,
    ExperimentConfig, OpponentSpec, WinRateReport, blackbox_eval, evaluate_cell, format_rate,
    results_dir, run_eval,
)
from .replay import (
    REPLAY_FORMAT, REPLAY_VERSION, ReplayLog, read_replay, render_replay, state_record,
    verify_replay, write_replay,
)
from .rollout import EpisodeResult, make_episode_env, run_episode

__all__ = [
    "ModelPolicy", "Policy", "ScriptPolicy", "parse_policy", "DEFAULT_BLACKBOX_EPISODES",
    "DEFAULT_EVAL_EPISODES", "DEFAULT_SEEDS", "RESULTS_ENV", "Cell", "ExperimentConfig",
    "OpponentSpec", "WinRateReport", "blackbox_eval", "evaluate_cell", "format_rate",
    "results_dir", "run_eval", "REPLAY_FORMAT", "REPLAY_VERSION", "ReplayLog", "read_replay",
    "render_replay", "state_record", "verify_replay", "write_replay", "EpisodeResult",
    "make_episode_env", "run_episode",
]
