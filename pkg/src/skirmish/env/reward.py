"""Shaped team reward: damage dealt, kills, and a win bonus.

Damage taken is never penalized, so every reward is non-negative.  The
environment additionally caps the damage credited against each enemy at that
enemy's max hp + max shield; without the cap, shield regeneration would let a
long fight earn more than the documented return bound.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..combat.engine import Status, StepOutcome
from ..combat.scenario import ScenarioConfig
from ..errors import ConfigurationError

#: the maximum episode return under default constants
TARGET_RETURN = 20.0
KILL_UNITS = 10.0
WIN_UNITS = 200.0

_WIN = {1: Status.P1_WIN, 2: Status.P2_WIN}


@dataclass(frozen=True)
class RewardComponents:
    damage_dealt: int
    kill_count: int
    won: bool

    def __post_init__(self):
        if self.damage_dealt < 0 or self.kill_count < 0:
            raise ValueError("reward components are non-negative")


@dataclass(frozen=True)
class RewardConstants:
    reward_scale: float
    kill_bonus: float
    win_bonus: float

    def __post_init__(self):
        if not self.reward_scale > 0:
            raise ConfigurationError("reward_scale must be positive")
        if self.kill_bonus < 0 or self.win_bonus < 0:
            raise ConfigurationError("kill_bonus and win_bonus must be non-negative")

    def apply(self, c: RewardComponents) -> float:
        return (self.reward_scale * c.damage_dealt + self.kill_bonus * c.kill_count
                + (self.win_bonus if c.won else 0.0))

    def max_return(self, scenario: ScenarioConfig, player: int) -> float:
        enemies = scenario.roster(2 if player == 1 else 1)
        pool = sum(a.max_hp + a.max_shield for a in enemies)
        return self.reward_scale * pool + self.kill_bonus * len(enemies) + self.win_bonus


def default_constants(scenario: ScenarioConfig, player: int = 1) -> RewardConstants:
    """Constants that normalize *player*'s maximum episode return to 20."""
    enemies = scenario.roster(2 if player == 1 else 1)
    pool = sum(a.max_hp + a.max_shield for a in enemies)
    scale = TARGET_RETURN / (pool + KILL_UNITS * len(enemies) + WIN_UNITS)
    return RewardConstants(scale, KILL_UNITS * scale, WIN_UNITS * scale)


def reward_components(outcome: StepOutcome, player: int) -> RewardComponents:
    other = 2 if player == 1 else 1
    return RewardComponents(outcome.damage_dealt_by(player), outcome.kills_against(other),
                            outcome.status_after is _WIN[player])


def compute_reward(outcome: StepOutcome, player: int, constants: RewardConstants) -> float:
    """Uncapped per-step reward of *player* for one engine outcome."""
    return constants.apply(reward_components(outcome, player))


NO_REWARD = RewardComponents(0, 0, False)


class DamageCredit:
    """Per-episode ledger capping credited damage at each enemy's hp + shield pool."""

    def __init__(self, scenario: ScenarioConfig, player: int):
        self.player = player
        self.remaining = [a.max_hp + a.max_shield
                          for a in scenario.roster(2 if player == 1 else 1)]

    def components(self, outcome: StepOutcome) -> RewardComponents:
        if not outcome.damage_events and outcome.status_after is Status.ONGOING:
            return NO_REWARD
        dealt = 0
        rem = self.remaining
        for e in outcome.damage_events:
            if e.attacker_player != self.player:
                continue
            amount = e.shield_damage + e.hp_damage
            left = rem[e.target_id]
            take = amount if amount < left else left
            rem[e.target_id] = left - take
            dealt += take
        other = 2 if self.player == 1 else 1
        return RewardComponents(dealt, outcome.kills_against(other),
                                outcome.status_after is _WIN[self.player])
