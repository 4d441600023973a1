"""Policies that can drive either side of a :class:`~skirmish.env.CombatEnv`.

A policy sees the environment after each step and returns the next action
list for one player: action indices in that player's own frame, or
:class:`~skirmish.combat.UnitCommand` objects in world frame.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol

from ..combat.engine import UnitCommand
from ..env.core import CombatEnv
from ..errors import ConfigurationError
from ..learner.train import QModel, load_model
from ..script.interpreter import script_codes
from ..script.library import BUILTIN_NAMES, load_script
from ..script.parser import DecisionTree


class Policy(Protocol):
    label: str

    def act(self, env: CombatEnv, player: int) -> list: ...


class ScriptPolicy:
    """Evaluate a decision tree on ground truth, like the scripted opponent."""

    def __init__(self, tree: DecisionTree, label: str | None = None):
        self.tree = tree
        self.label = label or tree.name or "script"

    def act(self, env: CombatEnv, player: int) -> list[UnitCommand]:
        codes = script_codes(self.tree, env.state, player)
        return [UnitCommand.from_code(uid, c) for uid, c in codes.items()]


class ModelPolicy:
    """Greedy policy of a trained Q-table, acting on its own player's observations."""

    def __init__(self, model: QModel, label: str | None = None):
        self.model = model
        self.featurizer = model.featurizer()
        self.label = label or f"qtable[{model.scenario}]"
        self._checked: set[tuple[int, int]] = set()

    def act(self, env: CombatEnv, player: int) -> list[int]:
        key = (id(env), player)
        if key not in self._checked:
            self.model.check_compatible(env, player)
            self._checked.add(key)
        q = self.model.q
        feat = self.featurizer
        st = env.state
        enc = env.encoder
        return [q.best_legal(feat(enc.observation(st, player, i)), enc.mask(st, player, i))[0]
                for i in range(env.roster.count(player))]


def parse_policy(spec: str | Policy) -> Policy:
    """Resolve ``script:<name|path>``, ``model:<path>``, a built-in name, or a file path."""
    if not isinstance(spec, str):
        return spec
    kind, _, ref = spec.partition(":")
    if not ref:
        kind, ref = ("script", spec) if spec in BUILTIN_NAMES or spec.endswith(".dsl") else ("model", spec)
    if kind == "script":
        return ScriptPolicy(load_script(ref), label=Path(ref).stem if ref not in BUILTIN_NAMES else ref)
    if kind == "model":
        return ModelPolicy(load_model(ref), label=Path(ref).stem)
    raise ConfigurationError(f"unknown policy spec {spec!r}")
