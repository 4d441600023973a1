"""Dual-sided multi-agent environment over the combat engine.

Player 1 is always driven through :meth:`CombatEnv.step_env`.  Player 2 is
either a scripted opponent (``decision_tree`` mode, the default) whose script
is drawn from a weighted mixture at every reset, or a second learner driven
through the same interface (``self_play`` mode).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..combat.engine import (
    ATTACK_BASE, NOOP, BattleState, Roster, Status, StepOutcome, UnitCommand, load_scenario,
    _advance, validate_codes,
)
from ..combat.scenario import ScenarioConfig, load_scenario_config
from ..errors import ConfigurationError, IllegalActionError, ProtocolError
from ..script.interpreter import script_codes
from ..script.library import BUILTIN_NAMES, load_script
from ..script.mixture import MixturePolicy, select_strategy
from ..script.parser import DecisionTree
from .encoding import Encoder, ego_to_world_code
from .reward import NO_REWARD, DamageCredit, RewardConstants, default_constants

MODES = ("decision_tree", "self_play")
DEFAULT_OPPONENTS = ("attack_nearest", "attack_weakest")
# separates the mixture draw stream from anything else keyed on the seed
_MIXTURE_STREAM = 0x6D6978


def default_mixture() -> MixturePolicy:
    """Equal-weight mixture of the nearest- and weakest-target scripts."""
    return MixturePolicy.uniform([load_script(n) for n in DEFAULT_OPPONENTS])


@dataclass
class EnvConfig:
    """Environment settings.  ``None`` reward fields take scenario-derived defaults."""

    scenario: ScenarioConfig
    mode: str = "decision_tree"
    opponent_mixture: MixturePolicy | None = None
    reward_scale: float | None = None
    kill_bonus: float | None = None
    win_bonus: float | None = None
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        self.scenario.validate()
        if self.opponent_mixture is None:
            self.opponent_mixture = default_mixture()
        elif not isinstance(self.opponent_mixture, MixturePolicy):
            raise ConfigurationError("opponent_mixture must be a MixturePolicy")
        self.constants(1)

    def constants(self, player: int) -> RewardConstants:
        base = default_constants(self.scenario, player)
        scale = self.reward_scale if self.reward_scale is not None else base.reward_scale
        # bonuses default to the same multiples of whichever scale is in use
        ratio = scale / base.reward_scale
        kill = self.kill_bonus if self.kill_bonus is not None else base.kill_bonus * ratio
        win = self.win_bonus if self.win_bonus is not None else base.win_bonus * ratio
        return RewardConstants(scale, kill, win)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], base_dir: Path | None = None) -> "EnvConfig":
        """Build from a record such as::

            {"scenario": "3s_vs_5z", "mode": "decision_tree",
             "opponent": {"scripts": ["attack_nearest", "attack_weakest"],
                          "weights": [0.5, 0.5], "resample_per_step": false},
             "reward_scale": null, "seed": 0}
        """
        base = base_dir or Path(".")
        scen = d.get("scenario")
        if isinstance(scen, Mapping):
            scenario = ScenarioConfig.from_dict(scen)
        elif isinstance(scen, str):
            candidate = base / scen
            scenario = load_scenario_config(candidate if candidate.is_file() else scen)
        else:
            raise ConfigurationError("env config needs a 'scenario' name, path or record")
        mixture = None
        opp = d.get("opponent")
        if opp is not None:
            if isinstance(opp, str):
                opp = {"scripts": [opp]}
            refs = opp.get("scripts") or []
            trees = [load_script(r if r in BUILTIN_NAMES else base / r) for r in refs]
            mixture = MixturePolicy.weighted(trees, opp.get("weights"),
                                             bool(opp.get("resample_per_step", False)))
        return cls(scenario=scenario, mode=str(d.get("mode", "decision_tree")),
                   opponent_mixture=mixture, reward_scale=d.get("reward_scale"),
                   kill_bonus=d.get("kill_bonus"), win_bonus=d.get("win_bonus"),
                   seed=int(d.get("seed", 0)))

    @classmethod
    def load(cls, path: str | Path) -> "EnvConfig":
        p = Path(path)
        return cls.from_dict(json.loads(p.read_text()), p.parent)


@dataclass
class EpisodeInfo:
    seed: int
    script_index: int | None
    script_name: str | None
    script_history: list[int] = field(default_factory=list)


class CombatEnv:
    """One battle at a time; not thread-safe, but instances share nothing."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self.scenario = config.scenario
        self.roster = Roster(config.scenario)
        self.encoder = Encoder(self.roster)
        self.self_play = config.mode == "self_play"
        self.constants = {1: config.constants(1), 2: config.constants(2)}
        self.mixture = config.opponent_mixture
        self.period = 8 - config.scenario.difficulty
        self.state: BattleState | None = None
        self.episode: EpisodeInfo | None = None
        self._resets = 0
        self._rng: np.random.Generator | None = None
        self._tree: DecisionTree | None = None
        self._opp_cache: dict[int, int] = {}
        self._credit: dict[int, DamageCredit] = {}
        self.last_commands: list[int] | None = None

    # ------------------------------------------------------------ shapes
    @property
    def n_agents(self) -> int:
        return self.roster.n1

    @property
    def n_enemies(self) -> int:
        return self.roster.n2

    def n_actions(self, player: int = 1) -> int:
        return self.encoder.n_actions(player)

    def obs_size(self, player: int = 1) -> int:
        return self.encoder.obs_size(player)

    def state_size(self) -> int:
        return self.encoder.state_size()

    def layouts(self, player: int = 1) -> dict[str, list[str]]:
        e = self.encoder
        return {"observation": e.observation_layout(player), "state": e.state_layout(player),
                "actions": e.action_layout(player)}

    # ------------------------------------------------------------ episode
    def reset(self, seed: int | None = None):
        """Start an episode and return player 1's (observations, state, masks).

        In self-play mode player 2's triple follows.  Without an explicit
        seed, the n-th reset uses ``config.seed + n``.
        """
        if seed is None:
            seed = self.config.seed + self._resets
        self._resets += 1
        self.state = load_scenario(self.scenario, seed, self.roster)
        self._credit = {1: DamageCredit(self.scenario, 1), 2: DamageCredit(self.scenario, 2)}
        self._opp_cache = {}
        self.last_commands = None
        if self.self_play:
            self.episode = EpisodeInfo(seed, None, None)
            self._tree = None
        else:
            self._rng = np.random.default_rng([seed, _MIXTURE_STREAM])
            idx = select_strategy(self.mixture, self._rng)
            self._tree = self.mixture.entries[idx][0]
            self.episode = EpisodeInfo(seed, idx, self._tree.name or None, [idx])
        out = (self.get_obs(1), self.get_state(1), self.get_avail_actions(1))
        if self.self_play:
            out += (self.get_obs(2), self.get_state(2), self.get_avail_actions(2))
        return out

    def _active(self) -> BattleState:
        if self.state is None:
            raise ProtocolError("call reset() before using the environment")
        return self.state

    def _player_codes(self, player: int, actions) -> list[int]:
        st = self.state
        r = self.roster
        n = r.count(player)
        if not isinstance(actions, list):
            actions = list(actions)
        if actions and isinstance(actions[0], UnitCommand):
            codes: list[int | None] = [None] * n
            for cmd in actions:
                if not isinstance(cmd, UnitCommand):
                    raise ProtocolError("cannot mix UnitCommand objects and action indices")
                if not 0 <= cmd.unit_id < n:
                    raise ProtocolError(f"player {player} has no unit {cmd.unit_id}")
                if codes[cmd.unit_id] is not None:
                    raise ProtocolError(f"player {player} unit {cmd.unit_id} commanded twice")
                codes[cmd.unit_id] = cmd.code
            off = r.offset(player)
            for uid in range(n):
                if codes[uid] is None:
                    if st.hp[off + uid] > 0:
                        raise ProtocolError(f"missing command for player {player} unit {uid}")
                    codes[uid] = NOOP
            return codes
        if len(actions) != n:
            raise ProtocolError(f"player {player} needs {n} actions, got {len(actions)}")
        legal = self.encoder.legal
        try:
            out = [int(a) for a in actions]
        except TypeError:
            raise ProtocolError("cannot mix UnitCommand objects and action indices") from None
        for i, a in enumerate(out):
            if not legal(st, player, i, a):
                raise IllegalActionError(
                    f"player {player} agent {i}: action {a} is not available",
                    player=player, agent=i, action=a)
        if player == 2:
            out = [ego_to_world_code(2, a) for a in out]
        return out

    def _opponent_codes(self) -> list[int]:
        st = self.state
        r = self.roster
        mix = self.mixture
        if mix.resample_per_step and st.step > 0:
            idx = select_strategy(mix, self._rng)
            self.episode.script_history.append(idx)
            if mix.entries[idx][0] is not self._tree:
                self._tree = mix.entries[idx][0]
                self._opp_cache = {}
        off = r.offset(2)
        hp = st.hp
        if self.period <= 1:
            cache = script_codes(self._tree, st, 2)
            return [cache.get(uid, NOOP) for uid in range(r.n2)]
        living = [g - off for g in r.team(2) if hp[g] > 0]
        cache = self._opp_cache
        if st.step % self.period == 0 or not cache:
            cache = script_codes(self._tree, st, 2)
        else:
            # between re-evaluations keep old orders while they stay valid
            stale = set()
            for uid in living:
                c = cache.get(uid)
                if c is None or (c >= ATTACK_BASE and hp[c - ATTACK_BASE] <= 0):
                    stale.add(uid)
            if stale:
                cache = dict(cache)
                cache.update(script_codes(self._tree, st, 2, only=stale))
        self._opp_cache = cache
        return [cache[uid] if hp[off + uid] > 0 else NOOP for uid in range(r.n2)]

    def step_env(self, actions_p1, actions_p2=None):
        """Advance one step.

        Actions are per-agent indices in the acting player's frame (checked
        against the masks) or :class:`UnitCommand` objects in world frame
        (checked by the engine).  Returns ``(reward_p1, terminated, info)``,
        or ``(reward_p1, reward_p2, terminated, info)`` in self-play mode.
        """
        st = self.state
        if st is None:
            raise ProtocolError("call reset() before using the environment")
        if st.status is not Status.ONGOING:
            raise ProtocolError("episode has terminated; call reset()")
        self_play = self.self_play
        if self_play:
            if actions_p2 is None:
                raise ProtocolError("self_play mode needs actions for player 2")
        elif actions_p2 is not None:
            raise ProtocolError("player 2 is scripted in decision_tree mode")
        if not isinstance(actions_p1, list):
            actions_p1 = list(actions_p1)
        scripted = bool(actions_p1) and isinstance(actions_p1[0], UnitCommand)
        codes = self._player_codes(1, actions_p1)
        if self_play:
            if not isinstance(actions_p2, list):
                actions_p2 = list(actions_p2)
            scripted = scripted or (bool(actions_p2) and isinstance(actions_p2[0], UnitCommand))
            codes += self._player_codes(2, actions_p2)
        else:
            codes += self._opponent_codes()
        if scripted:
            validate_codes(st, codes)
        self.last_commands = codes
        new, outcome = _advance(st, codes)
        self.state = new
        credit = self._credit
        c1 = credit[1].components(outcome)
        c2 = credit[2].components(outcome)
        r1 = 0.0 if c1 is NO_REWARD else self.constants[1].apply(c1)
        r2 = 0.0 if c2 is NO_REWARD else self.constants[2].apply(c2)
        status = outcome.status_after
        episode = self.episode
        info = {
            "outcome": outcome,
            "status": status,
            "won_p1": c1.won,
            "won_p2": c2.won,
            "reward_p2": r2,
            "step": new.step,
            "episode_limit": (status is Status.DRAW
                              and new.alive_count(1) > 0 and new.alive_count(2) > 0),
            "seed": episode.seed,
            "script_index": episode.script_index,
        }
        terminated = status is not Status.ONGOING
        if self.self_play:
            return r1, r2, terminated, info
        return r1, terminated, info

    # ------------------------------------------------------------ views
    def encode_observation(self, player: int, agent_index: int) -> np.ndarray:
        self._check_agent(player, agent_index)
        return self.encoder.observation(self._active(), player, agent_index)

    def encode_state(self, player: int = 1) -> np.ndarray:
        self._check_player(player)
        return self.encoder.state(self._active(), player)

    def available_actions(self, player: int, agent_index: int) -> np.ndarray:
        self._check_agent(player, agent_index)
        return self.encoder.mask(self._active(), player, agent_index)

    def get_obs(self, player: int = 1) -> np.ndarray:
        self._check_player(player)
        st = self._active()
        enc = self.encoder
        return np.stack([enc.observation(st, player, i) for i in range(self.roster.count(player))])

    def get_state(self, player: int = 1) -> np.ndarray:
        return self.encode_state(player)

    def get_avail_actions(self, player: int = 1) -> np.ndarray:
        self._check_player(player)
        st = self._active()
        enc = self.encoder
        return np.stack([enc.mask(st, player, i) for i in range(self.roster.count(player))])

    def _check_player(self, player: int) -> None:
        if player not in (1, 2):
            raise ProtocolError(f"unknown player {player!r}")

    def _check_agent(self, player: int, agent_index: int) -> None:
        self._check_player(player)
        if not 0 <= agent_index < self.roster.count(player):
            raise ProtocolError(f"player {player} has no agent {agent_index}")


def make_env(scenario: str | ScenarioConfig, *, opponent: str | Sequence[str] | MixturePolicy | None = None,
             mode: str = "decision_tree", seed: int = 0, **reward) -> CombatEnv:
    """Convenience constructor: scenario name/config plus opponent script name(s)."""
    if not isinstance(scenario, ScenarioConfig):
        scenario = load_scenario_config(scenario)
    if opponent is None or isinstance(opponent, MixturePolicy):
        mixture = opponent
    elif isinstance(opponent, str):
        mixture = MixturePolicy.uniform([load_script(opponent)])
    else:
        mixture = MixturePolicy.uniform([load_script(o) for o in opponent])
    return CombatEnv(EnvConfig(scenario, mode, mixture, seed=seed, **reward))
