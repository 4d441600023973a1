"""Tabular action values with parameter sharing, TD updates and VDN sums."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ProtocolError


class QTable:
    """Shared table ``Q[feature_index, action]``; unseen entries are 0."""

    def __init__(self, n_features: int, n_actions: int, values: np.ndarray | None = None):
        if values is None:
            values = np.zeros((n_features, n_actions), dtype=np.float64)
        elif values.shape != (n_features, n_actions):
            raise ValueError(f"table shape {values.shape} != {(n_features, n_actions)}")
        self.values = values

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, key):
        return self.values[key]

    def copy(self) -> "QTable":
        return QTable(self.n_features, self.n_actions, self.values.copy())

    def best_legal(self, f: int, mask) -> tuple[int, float]:
        """(argmax action, value) over legal actions; ties go to the lowest index."""
        row = self.values[f]
        best_a, best_v = -1, 0.0
        for a, ok in enumerate(mask):
            if ok:
                v = row[a]
                if best_a < 0 or v > best_v:
                    best_a, best_v = a, v
        if best_a < 0:
            raise ProtocolError("action mask has no legal action")
        return best_a, float(best_v)

    def max_legal(self, f: int, mask) -> float:
        return self.best_legal(f, mask)[1]


@dataclass(frozen=True)
class Transition:
    features: int
    action: int
    reward: float
    next_features: int
    terminal: bool
    next_mask: Sequence[bool]


def td_update(q: QTable, t: Transition, alpha: float, gamma: float) -> QTable:
    """One-step Q-learning update, applied in place; returns *q*.

    ``Q(f,a) += alpha * (r + gamma * max_{a' legal} Q(f',a') * [not terminal] - Q(f,a))``
    """
    target = t.reward
    if not t.terminal:
        target += gamma * q.max_legal(t.next_features, t.next_mask)
    row = q.values[t.features]
    row[t.action] += alpha * (target - row[t.action])
    return q


def vdn_joint_value(per_agent_values: Sequence[float]) -> float:
    """Joint value as the plain sum of per-agent values (0 for no agents)."""
    return float(sum(per_agent_values))


def vdn_update(q: QTable, features: Sequence[int], actions: Sequence[int], reward: float,
               next_features: Sequence[int], next_masks: Sequence[Sequence[bool]],
               terminal: bool, alpha: float, gamma: float) -> float:
    """Joint TD step on the additive value of the living agents; returns the TD error.

    Every participating entry moves by ``alpha * delta`` where
    ``delta = r + gamma * sum_i max Q_i(f'_i) - sum_i Q_i(f_i, a_i)``.
    """
    vals = q.values
    joint = vdn_joint_value([vals[f, a] for f, a in zip(features, actions)])
    target = reward
    if not terminal:
        target += gamma * vdn_joint_value([q.max_legal(f, m) for f, m in zip(next_features, next_masks)])
    delta = target - joint
    for f, a in zip(features, actions):
        vals[f, a] += alpha * delta
    return delta


def epsilon_greedy(q: QTable, features: int, mask, epsilon: float, rng: np.random.Generator) -> int:
    """Uniform legal action with probability *epsilon*, else the greedy legal action."""
    legal = [a for a, ok in enumerate(mask) if ok]
    if not legal:
        raise ProtocolError("action mask has no legal action")
    if epsilon > 0.0 and rng.random() < epsilon:
        return legal[int(rng.integers(len(legal)))]
    return q.best_legal(features, mask)[0]
