from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from skirmish.combat import (
    ATTACK_BASE, EAST, NOOP, NORTH, SCALE, STOP, Status, UnitArchetype, UnitCommand,
    check_terminal, default_unit_table, load_scenario, load_scenario_config, move_unit,
    shipped_scenarios, step, step_codes, to_fixed,
)
from skirmish.combat.units import load_unit_table, parse_unit_table
from skirmish.errors import ConfigurationError, IllegalActionError, ProtocolError

from conftest import make_scenario, place, random_battle_state, random_commands, table_with


# ---------------------------------------------------------------- stat table

def test_shipped_stats_make_kiting_possible():
    t = default_unit_table()
    assert t["marine"].max_hp == 45 and t["marine"].damage == 6
    assert t["marine"].attack_range == 5 and t["marine"].move_speed == 2.25
    assert t["stalker"].max_hp == 80 and t["stalker"].max_shield == 80
    assert t["stalker"].attack_range == 6
    assert t["zealot"].max_hp == 100 and t["zealot"].max_shield == 50
    assert t["stalker"].move_speed > t["zealot"].move_speed
    assert t["zergling"].max_hp == 35


def test_unit_table_rejects_duplicates_and_bad_version():
    rec = default_unit_table()["marine"].to_dict()
    with pytest.raises(ConfigurationError):
        parse_unit_table({"version": 1, "archetypes": [rec, rec]})
    with pytest.raises(ConfigurationError):
        parse_unit_table({"version": 2, "archetypes": [rec]})


def test_archetype_validation():
    with pytest.raises(ConfigurationError):
        UnitArchetype("x", 0, 0, 0, 1, 1.0, 2.0, 1, 1.0)
    with pytest.raises(ConfigurationError):
        UnitArchetype("x", 10, 0, 0, 1, 5.0, 2.0, 1, 1.0)
    with pytest.raises(ConfigurationError):
        UnitArchetype("x", 10, 0, 0, 1, 0.0, 2.0, 1, 0.0)


def test_load_unit_table_from_file(tmp_path):
    p = tmp_path / "units.json"
    p.write_text(json.dumps({"version": 1, "archetypes": [default_unit_table()["marine"].to_dict()]}))
    assert set(load_unit_table(p)) == {"marine"}


# ---------------------------------------------------------------- scenarios

def test_every_shipped_scenario_loads():
    names = shipped_scenarios()
    assert {"2m_vs_1z", "3m", "4m", "3s_vs_3z", "3s_vs_4z", "3s_vs_5z"} <= set(names)
    for name in names:
        st0 = load_scenario(load_scenario_config(name), 0)
        assert st0.status is Status.ONGOING


def test_load_scenario_construction_contract(tiny):
    s = load_scenario(tiny, 0)
    assert sum(1 for u in s.units if u.alive) == 3
    assert s.step == 0 and s.status is Status.ONGOING
    assert all(u.hp == u.archetype.max_hp and u.shield == u.archetype.max_shield for u in s.units)
    assert all(u.cooldown_remaining == 0 for u in s.units)
    assert not any(s.hate)


def test_load_scenario_is_deterministic(tiny):
    assert load_scenario(tiny, 7) == load_scenario(tiny, 7)
    seeds = {load_scenario(tiny, k).x for k in range(20)}
    assert len(seeds) > 1


def test_spawn_positions_inside_regions(tiny):
    for seed in range(30):
        s = load_scenario(tiny, seed)
        for u in s.units:
            reg = tiny.spawn(u.player)
            assert reg.x0 <= u.position[0] <= reg.x1 and reg.y0 <= u.position[1] <= reg.y1


@pytest.mark.parametrize("kw", [
    {"spawn2": (30, 30, 40, 40)},
    {"spawn2": (5, 5, 10, 10)},
    {"step_limit": 0},
    {"difficulty": 9},
])
def test_invalid_scenarios_raise(kw):
    with pytest.raises(ConfigurationError):
        load_scenario(make_scenario(["marine"], ["marine"], **kw), 0)


def test_empty_roster_rejected():
    with pytest.raises(ConfigurationError):
        load_scenario(make_scenario([], ["marine"]), 0)


def test_unknown_archetype_rejected():
    with pytest.raises(ConfigurationError):
        make_scenario(["dragoon"], ["marine"])


def test_scenario_roundtrip_and_hash(tiny):
    from skirmish.combat import ScenarioConfig
    again = ScenarioConfig.from_dict(tiny.to_dict())
    assert again == tiny and again.config_hash() == tiny.config_hash()
    other = make_scenario(["marine", "marine"], ["zealot"], table=table_with(zealot={"damage": 15}))
    assert other.config_hash() != make_scenario(["marine", "marine"], ["zealot"]).config_hash()


# ---------------------------------------------------------------- move_unit

def test_move_unit_examples():
    assert move_unit((5, 5), "north", 2, (32, 32)) == (5, 7)
    assert move_unit((5, 31), "north", 2, (32, 32)) == (5, 32)
    assert move_unit((0, 0), "west", 3, (32, 32)) == (0, 0)
    assert move_unit((5, 5), "east", 2, (32, 32)) == (7, 5)
    assert move_unit((5, 5), "south", 2, (32, 32)) == (5, 3)


# ---------------------------------------------------------------- damage rules

def _duel(att="marine", tgt="zealot", table=None):
    cfg = make_scenario([att], [tgt], table=table)
    s = load_scenario(cfg, 0)
    s = place(s, 1, 0, 10, 10)
    return place(s, 2, 0, 13, 10)


def test_shield_absorbs_first_and_armor_applies():
    s = _duel()
    s = s.replace_unit(2, 0, shield=4)
    s2, out = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.stop(0)])
    z = s2.unit(2, 0)
    assert (z.shield, z.hp) == (0, 99)
    assert out.damage_events == ((1, 0, 0, 4, 1),)
    assert out.kills == ()


def test_minimum_one_damage_per_shot():
    s = _duel(table=table_with(zealot={"armor": 10}))
    s2, out = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.stop(0)])
    assert out.damage_events[0].total == 1
    assert s2.unit(2, 0).shield == 49


def test_attack_requires_ready_cooldown():
    s = _duel().replace_unit(1, 0, cooldown=1)
    s2, out = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.stop(0)])
    assert out.damage_events == ()
    assert s2.unit(1, 0).cooldown_remaining == 0


def test_cooldown_after_firing():
    cfg = make_scenario(["zealot"], ["marine"])
    s = place(place(load_scenario(cfg, 0), 1, 0, 10, 10), 2, 0, 10.5, 10)
    seq = []
    for _ in range(4):
        s, out = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.stop(0)])
        seq.append(len(out.damage_events))
    assert seq == [1, 0, 1, 0]  # zealot cooldown_steps = 2


def test_out_of_range_attack_approaches_target():
    s = _duel()
    s = place(s, 2, 0, 20, 10)
    s2, out = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.stop(0)])
    assert out.damage_events == ()
    assert s2.unit(1, 0).position == (12.25, 10.0)


def test_approach_stops_inside_range():
    s = place(_duel(), 2, 0, 15.5, 10)
    s2, _ = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.stop(0)])
    x = s2.unit(1, 0).position[0]
    assert 15.5 - x == pytest.approx(4.5)


def test_hate_tracks_damage_and_decays():
    s = _duel()
    s2, _ = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.stop(0)])
    assert s2.unit(2, 0).hate[0] == 5
    s3, _ = step(s2, [UnitCommand.stop(0)], [UnitCommand.stop(0)])
    assert s3.unit(2, 0).hate[0] == pytest.approx(4.95)


def test_shield_regen_after_delay():
    s = _duel()
    s = s.replace_unit(2, 0, shield=10, since_damaged=9)
    s2, _ = step(s, [UnitCommand.stop(0)], [UnitCommand.stop(0)])
    assert s2.unit(2, 0).shield == 12
    s = s.replace_unit(2, 0, shield=49, since_damaged=50)
    s2, _ = step(s, [UnitCommand.stop(0)], [UnitCommand.stop(0)])
    assert s2.unit(2, 0).shield == 50


def test_no_regen_before_delay():
    s = _duel().replace_unit(2, 0, shield=10, since_damaged=3)
    s2, _ = step(s, [UnitCommand.stop(0)], [UnitCommand.stop(0)])
    assert s2.unit(2, 0).shield == 10


def test_mutual_kill_is_a_draw():
    cfg = make_scenario(["marine"], ["marine"])
    s = place(place(load_scenario(cfg, 0), 1, 0, 10, 10), 2, 0, 12, 10)
    s = s.replace_unit(1, 0, hp=3).replace_unit(2, 0, hp=6)
    s2, out = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.attack(0, 0)])
    assert set(out.kills) == {(1, 0), (2, 0)}
    assert out.status_after is Status.DRAW and s2.status is Status.DRAW


def test_dead_units_do_not_fire():
    cfg = make_scenario(["marine", "marine"], ["marine"])
    s = place(place(load_scenario(cfg, 0), 1, 0, 10, 10), 2, 0, 12, 10)
    s = s.replace_unit(1, 1, hp=0)
    with pytest.raises(IllegalActionError):
        step(s, [UnitCommand.attack(0, 0), UnitCommand.attack(1, 0)], [UnitCommand.stop(0)])
    with pytest.raises(IllegalActionError):
        step(s, [UnitCommand.attack(0, 0)], [UnitCommand.attack(0, 1)])
    s2, out = step(s, [UnitCommand.attack(0, 0)], [UnitCommand.stop(0)])
    assert s2.hp[1] == 0 and all(e.attacker_id == 0 for e in out.damage_events)


def test_command_count_errors():
    s = load_scenario(make_scenario(["marine", "marine"], ["marine"]), 0)
    with pytest.raises(ProtocolError):
        step(s, [UnitCommand.stop(0)], [UnitCommand.stop(0)])
    with pytest.raises(ProtocolError):
        step(s, [UnitCommand.stop(0), UnitCommand.stop(0)], [UnitCommand.stop(0)])
    with pytest.raises(ProtocolError):
        step(s, [UnitCommand.stop(0), UnitCommand.stop(5)], [UnitCommand.stop(0)])
    with pytest.raises(ProtocolError):
        step_codes(s, [STOP, STOP])


def test_attack_on_missing_enemy_is_illegal():
    s = load_scenario(make_scenario(["marine"], ["marine"]), 0)
    with pytest.raises(IllegalActionError) as ei:
        step(s, [UnitCommand.attack(0, 3)], [UnitCommand.stop(0)])
    assert ei.value.player == 1 and ei.value.agent == 0


def test_stepping_finished_battle_is_an_error():
    cfg = make_scenario(["marine"], ["marine"], step_limit=1)
    s, out = step(load_scenario(cfg, 0), [UnitCommand.stop(0)], [UnitCommand.stop(0)])
    assert s.status is Status.DRAW
    with pytest.raises(ProtocolError):
        step(s, [UnitCommand.stop(0)], [UnitCommand.stop(0)])


# ---------------------------------------------------------------- terminal

def test_check_terminal_cases():
    cfg = make_scenario(["marine", "marine"], ["marine"], step_limit=10)
    s = load_scenario(cfg, 0)
    assert check_terminal(s) is Status.ONGOING
    assert check_terminal(s.replace_unit(2, 0, hp=0).replace_unit(1, 0, hp=0)) is Status.P1_WIN
    assert check_terminal(s.replace_unit(1, 0, hp=0).replace_unit(1, 1, hp=0)) is Status.P2_WIN
    assert check_terminal(s._replace(step=10)) is Status.DRAW
    assert check_terminal(s._replace(step=9)) is Status.ONGOING


def test_stop_only_never_damages():
    cfg = load_scenario_config("3m")
    s = load_scenario(cfg, 3)
    s = place(s, 2, 0, *s.unit(1, 0).position)
    for _ in range(30):
        s, out = step_codes(s, [STOP] * s.roster.n)
        assert out.damage_events == ()


# ---------------------------------------------------------------- properties

@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["3m", "2s3z", "3s_vs_4z", "5m_vs_6m"]))
def test_order_independence(seed, name):
    rng = random.Random(seed)
    cfg = load_scenario_config(name)
    s = random_battle_state(rng, cfg)
    if s.status is not Status.ONGOING:
        return
    c1, c2 = random_commands(rng, s, 1), random_commands(rng, s, 2)
    ref = step(s, c1, c2)
    p1, p2 = c1[:], c2[:]
    rng.shuffle(p1)
    rng.shuffle(p2)
    assert step(s, p1, p2) == ref


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31))
def test_conservation_and_death_permanence(seed):
    rng = random.Random(seed)
    cfg = load_scenario_config("2s3z")
    s = load_scenario(cfg, seed % 1000)
    dead: set[int] = set()
    while s.status is Status.ONGOING:
        before = [s.hp[g] + s.shield[g] for g in range(s.roster.n)]
        s2, out = step(s, random_commands(rng, s, 1), random_commands(rng, s, 2))
        r = s.roster
        for g in range(r.n):
            after = s2.hp[g] + s2.shield[g]
            regen = r.regen[g]
            assert after <= before[g] + regen
            assert s2.shield[g] <= r.max_shield[g]
            if g in dead:
                assert s2.hp[g] == 0
        assert all(e.attacker_id not in {r.unit_ids[g] for g in dead if r.players[g] == e.attacker_player}
                   for e in out.damage_events)
        dead |= {g for g in range(r.n) if s2.hp[g] <= 0}
        assert check_terminal(s2) is out.status_after is s2.status
        s = s2


def test_trajectory_is_reproducible():
    cfg = load_scenario_config("2s3z")

    def run():
        rng = random.Random(5)
        s = load_scenario(cfg, 11)
        states = [s]
        while s.status is Status.ONGOING:
            s, _ = step(s, random_commands(rng, s, 1), random_commands(rng, s, 2))
            states.append(s)
        return states

    assert run() == run()


def test_unit_command_codes_roundtrip():
    for code in range(ATTACK_BASE + 4):
        assert UnitCommand.from_code(2, code).code == code
    assert UnitCommand.move(0, "north").code == NORTH
    assert UnitCommand.noop(0).code == NOOP
    with pytest.raises(ValueError):
        UnitCommand(0, "move", direction="up")
    with pytest.raises(ValueError):
        UnitCommand(0, "dance")
