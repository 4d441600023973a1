"""Training loop, learning curves and the model file format."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..env.core import CombatEnv, EnvConfig
from ..errors import ConfigurationError
from ..stats import DEFAULT_SMOOTHING, smooth
from .features import FeatureBins, Featurizer
from .qlearning import QTable, Transition, epsilon_greedy, td_update, vdn_joint_value, vdn_update

MODEL_FORMAT = "skirmish-qtable"
MODEL_VERSION = 1
#: tabular learning is refused above this many table rows
MAX_FEATURES = 200_000
#: evaluation episode seeds live far away from training seeds
EVAL_SEED_BASE = 1_000_000_000


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float = 0.3
    gamma: float = 0.9
    #: learning rate reached (linearly) at ``total_steps``; None keeps alpha constant
    alpha_end: float | None = 0.01
    epsilon_start: float = 1.0
    epsilon_end: float = 0.02
    epsilon_decay_steps: int = 100_000
    total_steps: int = 200_000
    bins: FeatureBins = field(default_factory=FeatureBins)
    use_vdn: bool = False
    eval_interval: int = 20_000
    eval_episodes: int = 32
    max_features: int = MAX_FEATURES

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError("alpha must lie in (0, 1]")
        if self.alpha_end is not None and not 0.0 < self.alpha_end <= 1.0:
            raise ConfigurationError("alpha_end must lie in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError("gamma must lie in [0, 1)")
        for eps in (self.epsilon_start, self.epsilon_end):
            if not 0.0 <= eps <= 1.0:
                raise ConfigurationError("epsilon values must lie in [0, 1]")
        if self.total_steps < 0 or self.epsilon_decay_steps < 0:
            raise ConfigurationError("step counts must be non-negative")
        if self.eval_interval <= 0 or self.eval_episodes <= 0:
            raise ConfigurationError("eval_interval and eval_episodes must be positive")

    def epsilon(self, step: int) -> float:
        if self.epsilon_decay_steps == 0 or step >= self.epsilon_decay_steps:
            return self.epsilon_end
        frac = step / self.epsilon_decay_steps
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)

    def learning_rate(self, step: int) -> float:
        if self.alpha_end is None or self.total_steps == 0:
            return self.alpha
        frac = min(step / self.total_steps, 1.0)
        return self.alpha + frac * (self.alpha_end - self.alpha)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bins"] = self.bins.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LearnerConfig":
        d = dict(d)
        if "bins" in d:
            d["bins"] = FeatureBins.from_dict(d["bins"])
        return cls(**d)


@dataclass
class LearningCurve:
    steps: list[int] = field(default_factory=list)
    win_rates: list[float] = field(default_factory=list)
    agent_values: list[list[float]] = field(default_factory=list)
    joint_values: list[float] = field(default_factory=list)

    def add(self, step: int, win_rate: float, agent_values: Sequence[float]) -> None:
        if self.steps and step <= self.steps[-1]:
            raise ValueError("learning-curve steps must strictly increase")
        self.steps.append(step)
        self.win_rates.append(win_rate)
        self.agent_values.append(list(agent_values))
        self.joint_values.append(vdn_joint_value(agent_values))

    def smoothed(self, factor: float = DEFAULT_SMOOTHING) -> list[float]:
        return smooth(self.win_rates, factor)

    @property
    def final(self) -> float:
        return self.win_rates[-1] if self.win_rates else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class QModel:
    """A trained table plus everything needed to rebuild its feature map."""

    q: QTable
    bins: FeatureBins
    scenario: str
    config_hash: str
    n_enemies: int
    n_allies: int
    block: int
    learner: dict = field(default_factory=dict)
    seed: int = 0
    opponent: list[str] = field(default_factory=list)

    def featurizer(self) -> Featurizer:
        return Featurizer(self.bins, self.n_enemies, self.n_allies, self.block)

    def check_compatible(self, env: CombatEnv, player: int = 1) -> None:
        r = env.roster
        other = 2 if player == 1 else 1
        shape = (r.count(other), r.count(player) - 1, env.encoder.block, env.n_actions(player))
        mine = (self.n_enemies, self.n_allies, self.block, self.q.n_actions)
        if shape != mine:
            raise ConfigurationError(
                f"model for {self.scenario!r} (enemies, allies, block, actions)={mine} does not fit "
                f"{env.scenario.name!r} player {player} {shape}")

    def to_dict(self) -> dict:
        rows = [[int(f), [float(v) for v in self.q.values[f]]]
                for f in np.flatnonzero(np.any(self.q.values != 0.0, axis=1))]
        return {
            "format": MODEL_FORMAT, "version": MODEL_VERSION,
            "scenario": self.scenario, "config_hash": self.config_hash,
            "seed": self.seed, "opponent": list(self.opponent),
            "layout": {"n_enemies": self.n_enemies, "n_allies": self.n_allies, "block": self.block},
            "bins": self.bins.to_dict(), "learner": self.learner,
            "n_features": self.q.n_features, "n_actions": self.q.n_actions,
            "rows": rows,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QModel":
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise ConfigurationError("not a version-1 skirmish Q-table model")
        q = QTable(int(d["n_features"]), int(d["n_actions"]))
        for f, row in d["rows"]:
            q.values[f] = row
        lay = d["layout"]
        return cls(q, FeatureBins.from_dict(d["bins"]), d["scenario"], d["config_hash"],
                   int(lay["n_enemies"]), int(lay["n_allies"]), int(lay["block"]),
                   d.get("learner", {}), int(d.get("seed", 0)), list(d.get("opponent", [])))

    def save(self, path: str | Path) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n")
        return p


def load_model(path: str | Path) -> QModel:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"model file not found: {p}")
    return QModel.from_dict(json.loads(p.read_text()))


def greedy_actions(model: QModel, featurizer: Featurizer, obs, masks) -> list[int]:
    q = model.q
    return [q.best_legal(featurizer(o), m)[0] for o, m in zip(obs, masks)]


def evaluate(model: QModel, env: CombatEnv, episodes: int, seed_base: int) -> tuple[float, list[float]]:
    """Greedy win rate of player 1 plus the per-agent greedy values at the first reset."""
    feat = model.featurizer()
    wins = 0
    probe: list[float] = []
    for k in range(episodes):
        obs, _, masks = env.reset(seed_base + k)
        if k == 0:
            probe = [model.q.best_legal(feat(o), m)[1]
                     for o, m in zip(obs, masks) if not m[0]]  # noop is legal only when dead
        done = False
        while not done:
            _, done, info = env.step_env(greedy_actions(model, feat, obs, masks))
            if not done:
                obs, masks = env.get_obs(1), env.get_avail_actions(1)
        wins += bool(info["won_p1"])
    return wins / episodes, probe


@dataclass
class TrainResult:
    model: QModel
    curve: LearningCurve
    path: Path | None = None


def train(env_config: EnvConfig, learner_config: LearnerConfig | None = None, seed: int = 0,
          model_path: str | Path | None = None) -> TrainResult:
    """Train player 1 against the configured opponent for ``total_steps`` env steps."""
    lc = learner_config or LearnerConfig()
    if env_config.mode != "decision_tree":
        raise ConfigurationError("the tabular learner trains against scripted opponents only")
    if lc.bins.size > lc.max_features:
        raise ConfigurationError(
            f"feature space of {lc.bins.size} rows exceeds the bound of {lc.max_features}")
    env = CombatEnv(env_config)
    eval_env = CombatEnv(env_config)
    feat = Featurizer.for_env(env, lc.bins)
    n = env.n_agents
    model = QModel(QTable(lc.bins.size, env.n_actions(1)), lc.bins, env.scenario.name,
                   env.scenario.config_hash(), feat.n_enemies, feat.n_allies, feat.block,
                   lc.to_dict(), seed, [t.name for t in env.mixture.trees])
    q = model.q
    rng = np.random.default_rng([seed, 0x71])
    curve = LearningCurve()
    gamma = lc.gamma
    episode_seed = seed * 1_000_003
    steps = 0
    next_eval = lc.eval_interval
    while steps < lc.total_steps:
        obs, _, masks = env.reset(episode_seed)
        episode_seed += 1
        fs = [feat(o) for o in obs]
        done = False
        while not done and steps < lc.total_steps:
            eps = lc.epsilon(steps)
            alpha = lc.learning_rate(steps)
            acts = [epsilon_greedy(q, f, m, eps, rng) for f, m in zip(fs, masks)]
            reward, done, _ = env.step_env(acts)
            steps += 1
            obs = env.get_obs(1)
            masks = env.get_avail_actions(1)
            nfs = [feat(o) for o in obs]
            alive = [i for i in range(n) if fs[i] != 0]
            if lc.use_vdn:
                live_next = [i for i in alive if nfs[i] != 0]
                vdn_update(q, [fs[i] for i in alive], [acts[i] for i in alive], reward,
                           [nfs[i] for i in live_next], [masks[i] for i in live_next],
                           done, alpha, gamma)
            else:
                share = reward / n
                for i in alive:
                    td_update(q, Transition(fs[i], acts[i], share, nfs[i],
                                            done or nfs[i] == 0, masks[i]), alpha, gamma)
            fs = nfs
            if steps >= next_eval:
                rate, probe = evaluate(model, eval_env, lc.eval_episodes,
                                       EVAL_SEED_BASE + steps)
                curve.add(steps, rate, probe)
                next_eval += lc.eval_interval
    if not curve.steps or curve.steps[-1] != steps:
        rate, probe = evaluate(model, eval_env, lc.eval_episodes, EVAL_SEED_BASE + steps)
        curve.add(steps, rate, probe)
    path = model.save(model_path) if model_path is not None else None
    return TrainResult(model, curve, path)
