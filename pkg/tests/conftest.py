from __future__ import annotations

import json
import random
from dataclasses import replace

import pytest

from skirmish.combat import (
    ScenarioConfig, UnitCommand, default_unit_table, load_scenario, load_scenario_config,
)


@pytest.fixture
def tiny():
    return load_scenario_config("2m_vs_1z")


def make_scenario(team1, team2, *, width=32, height=32, spawn1=(2, 2, 8, 8),
                  spawn2=(20, 20, 26, 26), step_limit=100, difficulty=7, table=None,
                  name="fixture") -> ScenarioConfig:
    doc = {"version": 1, "name": name, "map": {"width": width, "height": height},
           "team1_spawn": list(spawn1), "team2_spawn": list(spawn2),
           "team1_roster": list(team1), "team2_roster": list(team2),
           "step_limit": step_limit, "difficulty": difficulty}
    return ScenarioConfig.from_dict(doc, table)


def table_with(**overrides):
    """Default unit table with per-archetype field overrides."""
    t = dict(default_unit_table())
    for name, kv in overrides.items():
        t[name] = replace(t[name], **kv)
    return t


def place(state, player, unit_id, x, y, **kw):
    return state.replace_unit(player, unit_id, position=(x, y), **kw)


def random_battle_state(rng: random.Random, cfg):
    """Scenario start with every unit moved and damaged at random."""
    s = load_scenario(cfg, rng.randrange(10_000))
    for g in range(s.roster.n):
        p, u = s.roster.players[g], s.roster.unit_ids[g]
        a = s.roster.archetypes[g]
        s = s.replace_unit(p, u, position=(rng.uniform(0, cfg.map_width), rng.uniform(0, cfg.map_height)),
                           hp=rng.choice([0, rng.randint(1, a.max_hp)]) if rng.random() < 0.2 else rng.randint(1, a.max_hp),
                           shield=rng.randint(0, a.max_shield),
                           cooldown=rng.randint(0, a.cooldown_steps),
                           since_damaged=rng.randint(0, 15))
    return s


def random_commands(rng: random.Random, s, player):
    r = s.roster
    out = []
    enemies = s.living(2 if player == 1 else 1)
    for uid in range(r.count(player)):
        g = r.index(player, uid)
        if s.hp[g] <= 0:
            if rng.random() < 0.5:
                out.append(UnitCommand.noop(uid))
            continue
        k = rng.randrange(4)
        if k == 0 or not enemies:
            out.append(UnitCommand.stop(uid))
        elif k == 1:
            out.append(UnitCommand.move(uid, rng.choice(["north", "south", "east", "west"])))
        else:
            out.append(UnitCommand.attack(uid, rng.choice(enemies)))
    return out
