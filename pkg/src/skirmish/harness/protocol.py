"""Evaluation protocol: experiment configs, win-rate aggregation and reports.

A cell of a report is one (task, policy) pair evaluated ``n_seeds`` times
with ``n_eval_episodes`` episodes each; its value is the mean of the
per-seed win rates.  Draws count as non-wins.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ..combat.scenario import load_scenario_config
from ..env.core import DEFAULT_OPPONENTS, CombatEnv, EnvConfig
from ..errors import ConfigurationError
from ..learner.train import QModel, load_model
from ..script.library import BUILTIN_NAMES, load_script
from ..script.mixture import MixturePolicy
from ..stats import DEFAULT_SMOOTHING, mean, smooth, variance
from .policies import ModelPolicy, Policy, parse_policy
from .rollout import EpisodeResult, make_episode_env, run_episode

DEFAULT_EVAL_EPISODES = 32
DEFAULT_SEEDS = 5
DEFAULT_BLACKBOX_EPISODES = 256
RESULTS_ENV = "SKIRMISH_RESULTS_DIR"
#: episodes of seed index s use seeds ``seed_base + s * SEED_STRIDE + k``
SEED_STRIDE = 1_000_000



def format_rate(x: float) -> str:
    """Four decimals, with exact zero printed as ``0``."""
    return "0" if x == 0 else f"{x:.4f}"


def results_dir(explicit: str | Path | None = None) -> Path | None:
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(RESULTS_ENV)
    return Path(env) if env else None


@dataclass(frozen=True)
class OpponentSpec:
    """Player-2 driver: a weighted script mixture, or a policy for self-play."""

    scripts: tuple[str, ...] = DEFAULT_OPPONENTS
    weights: tuple[float, ...] | None = None
    resample_per_step: bool = False
    policy: str | None = None

    @property
    def label(self) -> str:
        if self.policy is not None:
            return f"selfplay:{self.policy}"
        names = [Path(s).stem if s not in BUILTIN_NAMES else s for s in self.scripts]
        if self.weights is None or len(set(self.weights)) == 1:
            return "+".join(names) if len(names) > 1 else names[0]
        return "+".join(f"{n}@{w:g}" for n, w in zip(names, self.weights))

    def mixture(self) -> MixturePolicy:
        trees = [load_script(s) for s in self.scripts]
        return MixturePolicy.weighted(trees, self.weights, self.resample_per_step)

    @classmethod
    def parse(cls, spec: "str | Sequence[str] | OpponentSpec | dict") -> "OpponentSpec":
        if isinstance(spec, OpponentSpec):
            return spec
        if isinstance(spec, dict):
            if spec.get("policy"):
                return cls(policy=str(spec["policy"]))
            w = spec.get("weights")
            return cls(tuple(spec.get("scripts", DEFAULT_OPPONENTS)),
                       tuple(float(x) for x in w) if w is not None else None,
                       bool(spec.get("resample_per_step", False)))
        if isinstance(spec, str):
            if spec.startswith("selfplay:"):
                return cls(policy=spec[len("selfplay:"):])
            return cls(tuple(s for s in spec.split("+") if s))
        return cls(tuple(spec))

    def to_dict(self) -> dict:
        return {"scripts": list(self.scripts), "weights": list(self.weights) if self.weights else None,
                "resample_per_step": self.resample_per_step, "policy": self.policy}


@dataclass
class ExperimentConfig:
    scenarios: list[str]
    policy: str = "attack_nearest"
    opponent: OpponentSpec = field(default_factory=OpponentSpec)
    n_eval_episodes: int = DEFAULT_EVAL_EPISODES
    n_seeds: int = DEFAULT_SEEDS
    smoothing: float = DEFAULT_SMOOTHING
    seed_base: int = 0
    output_dir: str | None = None

    def __post_init__(self):
        if not self.scenarios:
            raise ConfigurationError("experiment needs at least one scenario")
        if self.n_eval_episodes <= 0 or self.n_seeds <= 0:
            raise ConfigurationError("n_eval_episodes and n_seeds must be positive")
        if not 0.0 <= self.smoothing < 1.0:
            raise ConfigurationError("smoothing must lie in [0, 1)")
        self.opponent = OpponentSpec.parse(self.opponent)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"scenarios", "policy", "opponent", "n_eval_episodes", "n_seeds", "smoothing",
                 "seed_base", "output_dir"}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown experiment field(s): {', '.join(sorted(unknown))}")
        d = dict(d)
        if "opponent" in d:
            d["opponent"] = OpponentSpec.parse(d["opponent"])
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class Cell:
    task: str
    label: str
    per_seed: list[float]
    results: list[EpisodeResult] = field(default_factory=list, repr=False)

    @property
    def mean(self) -> float:
        return mean(self.per_seed)

    @property
    def variance(self) -> float:
        return variance(self.per_seed)

    def to_dict(self) -> dict:
        return {"task": self.task, "label": self.label, "mean": self.mean,
                "per_seed": self.per_seed, "variance": self.variance,
                "episodes": len(self.results)}


@dataclass
class WinRateReport:
    cells: dict[tuple[str, str], Cell] = field(default_factory=dict)
    curves: dict[tuple[str, str], dict] = field(default_factory=dict)

    @property
    def tasks(self) -> list[str]:
        return list(dict.fromkeys(t for t, _ in self.cells))

    @property
    def labels(self) -> list[str]:
        return list(dict.fromkeys(l for _, l in self.cells))

    def add(self, cell: Cell) -> None:
        self.cells[(cell.task, cell.label)] = cell

    def rate(self, task: str, label: str) -> float:
        return self.cells[(task, label)].mean

    def add_curve(self, task: str, label: str, steps: Sequence[int], rates: Sequence[float],
                  factor: float = DEFAULT_SMOOTHING) -> None:
        self.curves[(task, label)] = {"steps": list(steps), "raw": list(rates),
                                      "smoothed": smooth(rates, factor), "factor": factor}

    def table(self) -> str:
        labels = self.labels
        rows = [["task", *labels]]
        for t in self.tasks:
            rows.append([t, *(format_rate(self.cells[(t, l)].mean) if (t, l) in self.cells else "-"
                              for l in labels)])
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = [" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["task", "label", "mean", "variance", "per_seed"])
        for c in self.cells.values():
            w.writerow([c.task, c.label, repr(c.mean), repr(c.variance),
                        " ".join(repr(x) for x in c.per_seed)])
        return buf.getvalue()

    def jsonl(self) -> str:
        lines = []
        for c in self.cells.values():
            for r in c.results:
                lines.append(json.dumps({"task": c.task, "label": c.label, **r.to_dict()}))
        return "\n".join(lines) + ("\n" if lines else "")

    def to_dict(self) -> dict:
        return {"cells": [c.to_dict() for c in self.cells.values()],
                "curves": [{"task": t, "label": l, **v} for (t, l), v in self.curves.items()]}

    def write(self, directory: str | Path, stem: str = "report") -> dict[str, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {"table": d / f"{stem}.txt", "csv": d / f"{stem}.csv",
                 "jsonl": d / f"{stem}.episodes.jsonl", "json": d / f"{stem}.json"}
        paths["table"].write_text(self.table())
        paths["csv"].write_text(self.csv())
        paths["jsonl"].write_text(self.jsonl())
        paths["json"].write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return paths


def _env_config(scenario: str, opponent: OpponentSpec) -> EnvConfig:
    scen = load_scenario_config(scenario)
    if opponent.policy is not None:
        return EnvConfig(scen, mode="self_play")
    return EnvConfig(scen, opponent_mixture=opponent.mixture())


def evaluate_cell(task: str, label: str, env: CombatEnv, policy: Policy, opponent: Policy | None,
                  n_seeds: int, n_episodes: int, seed_base: int) -> Cell:
    per_seed, results = [], []
    for s in range(n_seeds):
        wins = 0
        for k in range(n_episodes):
            res, _ = run_episode(env, policy, opponent, seed_base + s * SEED_STRIDE + k)
            wins += res.won
            results.append(res)
        per_seed.append(wins / n_episodes)
    return Cell(task, label, per_seed, results)


def run_eval(config: ExperimentConfig) -> WinRateReport:
    """Evaluate the configured policy on every scenario; one report column."""
    policy = parse_policy(config.policy)
    opp_policy = parse_policy(config.opponent.policy) if config.opponent.policy else None
    report = WinRateReport()
    for task in config.scenarios:
        env = make_episode_env(_env_config(task, config.opponent), opp_policy)
        report.add(evaluate_cell(task, policy.label, env, policy, opp_policy, config.n_seeds,
                                 config.n_eval_episodes, config.seed_base))
    out = results_dir(config.output_dir)
    if out is not None:
        report.write(out)
    return report


def blackbox_eval(model: QModel | Policy | str | Path, train_opponent: OpponentSpec | str,
                  test_opponents: Iterable[OpponentSpec | str], scenario: str | None = None, *,
                  n_episodes: int = DEFAULT_BLACKBOX_EPISODES, n_seeds: int = 1,
                  seed_base: int = 0) -> WinRateReport:
    """Evaluate a frozen model against its training opponent and unseen ones.

    Columns are opponent labels; the training opponent's column comes first
    and is suffixed ``(train)``.
    """
    if isinstance(model, (str, Path)):
        model = load_model(model)
    policy = ModelPolicy(model) if isinstance(model, QModel) else model
    if scenario is None:
        if not isinstance(model, QModel):
            raise ConfigurationError("scenario is required for non-model policies")
        scenario = model.scenario
    train_spec = OpponentSpec.parse(train_opponent)
    specs = [(train_spec, f"{train_spec.label} (train)")]
    specs += [(OpponentSpec.parse(s), OpponentSpec.parse(s).label) for s in test_opponents]
    report = WinRateReport()
    for spec, label in specs:
        env = make_episode_env(_env_config(scenario, spec), None)
        if isinstance(model, QModel):
            model.check_compatible(env, 1)
        report.add(evaluate_cell(scenario, label, env, policy, None, n_seeds, n_episodes, seed_base))
    return report
