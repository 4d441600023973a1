"""Observation, state and action-mask encoders.

Both players are encoded by the same functions.  Player 2 sees the world in
its own frame, rotated 180 degrees about the map centre, so a mirrored
battle produces identical vectors for the two sides and a policy trained as
player 1 can drive player 2 unchanged.  Move actions are mapped back to world
directions by :func:`ego_to_world_code`.

Observation layout per agent (all entries in [-1, 1]):

* own block: hp fraction, shield fraction, cooldown-ready flag, x / width,
  y / height
* one block per enemy slot, then one per ally slot (roster order, self
  skipped): visible, dx / sight, dy / sight, distance / sight, hp fraction,
  shield fraction, archetype one-hot

A block is all-zero when the unit is dead or farther than the observer's
sight range; a dead observer gets an all-zero vector.
"""

from __future__ import annotations

from math import sqrt

import numpy as np

from ..combat.engine import ATTACK_BASE, EAST, NOOP, NORTH, SOUTH, STOP, WEST, BattleState

OWN_FEATURES = ("hp_fraction", "shield_fraction", "cooldown_ready", "x", "y")
UNIT_FEATURES = ("visible", "rel_x", "rel_y", "distance", "hp_fraction", "shield_fraction")
STATE_FEATURES = ("alive", "hp_fraction", "shield_fraction", "cooldown_fraction", "x", "y")
MOVE_NAMES = ("noop", "stop", "move_north", "move_south", "move_east", "move_west")

_MIRROR = {NORTH: SOUTH, SOUTH: NORTH, EAST: WEST, WEST: EAST}


def ego_to_world_code(player: int, code: int) -> int:
    """Translate an action index from *player*'s frame to world frame."""
    if player == 2:
        return _MIRROR.get(code, code)
    return code


def _other(player: int) -> int:
    return 2 if player == 1 else 1


class Encoder:
    """Layout-aware encoder bound to one scenario roster."""

    def __init__(self, roster):
        self.roster = roster
        cfg = roster.config
        self.types = cfg.archetype_names()
        self.type_index = {name: i for i, name in enumerate(self.types)}
        self.onehot = [self.type_index[a.name] for a in roster.archetypes]
        self.block = len(UNIT_FEATURES) + len(self.types)

    # ---------------------------------------------------------- layouts
    def n_agents(self, player: int) -> int:
        return self.roster.count(player)

    def n_actions(self, player: int) -> int:
        return ATTACK_BASE + self.roster.count(_other(player))

    def obs_size(self, player: int) -> int:
        r = self.roster
        return len(OWN_FEATURES) + self.block * (r.count(_other(player)) + r.count(player) - 1)

    def state_size(self) -> int:
        return self.roster.n * (len(STATE_FEATURES) + len(self.types))

    def observation_layout(self, player: int) -> list[str]:
        r = self.roster
        unit = list(UNIT_FEATURES) + [f"type={t}" for t in self.types]
        names = [f"own.{f}" for f in OWN_FEATURES]
        for j in range(r.count(_other(player))):
            names += [f"enemy[{j}].{f}" for f in unit]
        for j in range(r.count(player) - 1):
            names += [f"ally[{j}].{f}" for f in unit]
        return names

    def state_layout(self, player: int) -> list[str]:
        r = self.roster
        unit = list(STATE_FEATURES) + [f"type={t}" for t in self.types]
        names = []
        for side, p in (("team", player), ("enemy", _other(player))):
            for j in range(r.count(p)):
                names += [f"{side}[{j}].{f}" for f in unit]
        return names

    def action_layout(self, player: int) -> list[str]:
        return list(MOVE_NAMES) + [f"attack[{j}]" for j in range(self.roster.count(_other(player)))]

    # ---------------------------------------------------------- encoders
    def _unit_block(self, out: np.ndarray, at: int, st: BattleState, g: int, u: int,
                    sign: int, sight: int) -> None:
        r = self.roster
        if st.hp[u] <= 0:
            return
        dx = st.x[u] - st.x[g]
        dy = st.y[u] - st.y[g]
        d2 = dx * dx + dy * dy
        if d2 > sight * sight:
            return
        out[at] = 1.0
        out[at + 1] = sign * dx / sight
        out[at + 2] = sign * dy / sight
        out[at + 3] = sqrt(d2) / sight
        out[at + 4] = st.hp[u] / r.max_hp[u]
        ms = r.max_shield[u]
        out[at + 5] = st.shield[u] / ms if ms else 0.0
        out[at + len(UNIT_FEATURES) + self.onehot[u]] = 1.0

    def observation(self, st: BattleState, player: int, agent: int) -> np.ndarray:
        r = self.roster
        out = np.zeros(self.obs_size(player), dtype=np.float32)
        g = r.index(player, agent)
        if st.hp[g] <= 0:
            return out
        sign = 1 if player == 1 else -1
        out[0] = st.hp[g] / r.max_hp[g]
        ms = r.max_shield[g]
        out[1] = st.shield[g] / ms if ms else 0.0
        out[2] = 1.0 if st.cooldown[g] == 0 else 0.0
        if player == 1:
            out[3] = st.x[g] / r.width
            out[4] = st.y[g] / r.height
        else:
            out[3] = (r.width - st.x[g]) / r.width
            out[4] = (r.height - st.y[g]) / r.height
        sight = r.sight_fx[g]
        at = len(OWN_FEATURES)
        for u in r.team(_other(player)):
            self._unit_block(out, at, st, g, u, sign, sight)
            at += self.block
        for u in r.team(player):
            if u == g:
                continue
            self._unit_block(out, at, st, g, u, sign, sight)
            at += self.block
        return out

    def state(self, st: BattleState, player: int) -> np.ndarray:
        r = self.roster
        width = len(STATE_FEATURES) + len(self.types)
        out = np.zeros(self.state_size(), dtype=np.float32)
        at = 0
        for p in (player, _other(player)):
            for u in r.team(p):
                if st.hp[u] > 0:
                    out[at] = 1.0
                    out[at + 1] = st.hp[u] / r.max_hp[u]
                    ms = r.max_shield[u]
                    out[at + 2] = st.shield[u] / ms if ms else 0.0
                    cd = r.cooldown[u]
                    out[at + 3] = st.cooldown[u] / cd if cd else 0.0
                    if player == 1:
                        out[at + 4] = st.x[u] / r.width
                        out[at + 5] = st.y[u] / r.height
                    else:
                        out[at + 4] = (r.width - st.x[u]) / r.width
                        out[at + 5] = (r.height - st.y[u]) / r.height
                    out[at + len(STATE_FEATURES) + self.onehot[u]] = 1.0
                at += width
        return out

    def mask(self, st: BattleState, player: int, agent: int) -> np.ndarray:
        r = self.roster
        g = r.index(player, agent)
        out = np.zeros(self.n_actions(player), dtype=bool)
        if st.hp[g] <= 0:
            out[NOOP] = True
            return out
        out[STOP:ATTACK_BASE] = True
        s2 = r.sight2[g]
        gx, gy = st.x[g], st.y[g]
        for k, u in enumerate(r.team(_other(player))):
            if st.hp[u] > 0 and (st.x[u] - gx) ** 2 + (st.y[u] - gy) ** 2 <= s2:
                out[ATTACK_BASE + k] = True
        return out

    def legal(self, st: BattleState, player: int, agent: int, code: int) -> bool:
        """Scalar mask lookup without building the vector."""
        r = self.roster
        g = agent if player == 1 else r.n1 + agent
        if st.hp[g] <= 0:
            return code == NOOP
        if code < ATTACK_BASE:
            return code >= STOP
        k = code - ATTACK_BASE
        if k >= r.enemy_count[g]:
            return False
        u = r.enemy_base[g] + k
        if st.hp[u] <= 0:
            return False
        dx = st.x[u] - st.x[g]
        dy = st.y[u] - st.y[g]
        return dx * dx + dy * dy <= r.sight2[g]
