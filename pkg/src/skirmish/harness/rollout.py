"""Single-episode rollouts."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..combat.engine import Status
from ..env.core import CombatEnv, EnvConfig
from .policies import Policy
from .replay import ReplayLog

_WINNER = {Status.P1_WIN: "p1", Status.P2_WIN: "p2", Status.DRAW: "draw"}


@dataclass(frozen=True)
class EpisodeResult:
    winner: str  # "p1", "p2" or "draw"
    steps: int
    return_p1: float
    return_p2: float
    opponent_script_index: int | None
    seed: int

    @property
    def won(self) -> bool:
        return self.winner == "p1"

    def to_dict(self) -> dict:
        return {"winner": self.winner, "steps": self.steps, "return_p1": self.return_p1,
                "return_p2": self.return_p2, "opponent_script_index": self.opponent_script_index,
                "seed": self.seed}


def make_episode_env(env_config: EnvConfig, opponent: Policy | None) -> CombatEnv:
    """Self-play env when player 2 is a policy, else the config's scripted mode."""
    if opponent is not None and env_config.mode != "self_play":
        env_config = replace(env_config, mode="self_play")
    return CombatEnv(env_config)


def run_episode(env_config: EnvConfig | CombatEnv, policy_p1: Policy, policy_p2: Policy | None,
                seed: int, *, record: bool = False) -> tuple[EpisodeResult, ReplayLog | None]:
    """Play one episode to termination.

    With ``policy_p2=None`` player 2 is the configured script mixture;
    otherwise both sides are driven through the self-play interface.  An
    already-built environment may be passed to skip construction.
    """
    env = env_config if isinstance(env_config, CombatEnv) else make_episode_env(env_config, policy_p2)
    if policy_p2 is not None and not env.self_play:
        raise ValueError("a player-2 policy needs a self_play environment")
    env.reset(seed)
    log = ReplayLog.start(env.state, seed, env.episode.script_index) if record else None
    ret1 = ret2 = 0.0
    done = False
    info: dict = {}
    while not done:
        a1 = policy_p1.act(env, 1)
        if env.self_play:
            r1, r2, done, info = env.step_env(a1, policy_p2.act(env, 2))
        else:
            r1, done, info = env.step_env(a1)
            r2 = info["reward_p2"]
        ret1 += r1
        ret2 += r2
        if log is not None:
            log.record(env.last_commands, info["outcome"], env.state)
    st = env.state
    result = EpisodeResult(_WINNER[st.status], st.step, ret1, ret2,
                           env.episode.script_index, seed)
    if log is not None:
        log.finish(result.winner, result.steps)
    return result, log
