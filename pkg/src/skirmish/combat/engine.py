"""Deterministic two-team combat engine.

World state is kept in flat integer tuples indexed by a *global* unit index
(team 1 roster first, then team 2).  Positions are fixed-point, hit points and
shields are whole points and hate is stored in milli-points, so a trajectory
is reproducible bit for bit.

A step is resolved simultaneously: movement, approach and every shot are
computed from the pre-step snapshot and then applied together, which makes the
result independent of the order in which commands were submitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import isqrt
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ..errors import ConfigurationError, IllegalActionError, ProtocolError
from .scenario import ScenarioConfig
from .units import UnitArchetype, from_fixed, to_fixed

NOOP, STOP, NORTH, SOUTH, EAST, WEST = range(6)
ATTACK_BASE = 6
DIRECTIONS = ("north", "south", "east", "west")
_DIR_CODE = {d: NORTH + i for i, d in enumerate(DIRECTIONS)}
_DIR_DELTA = {NORTH: (0, 1), SOUTH: (0, -1), EAST: (1, 0), WEST: (-1, 0)}

HATE_DECAY_NUM, HATE_DECAY_DEN = 99, 100
HATE_SCALE = 1000
# attackers closing in stop at this fraction of their attack range
APPROACH_NUM, APPROACH_DEN = 9, 10


class Status(str, Enum):
    ONGOING = "ongoing"
    P1_WIN = "p1_win"
    P2_WIN = "p2_win"
    DRAW = "draw"


@dataclass(frozen=True)
class UnitCommand:
    """Order for one unit.  ``unit_id`` names the acting unit within its player."""

    unit_id: int
    kind: str = "stop"
    direction: str | None = None
    target: int | None = None

    def __post_init__(self):
        if self.kind == "move":
            if self.direction not in _DIR_CODE:
                raise ValueError(f"bad move direction {self.direction!r}")
        elif self.kind == "attack":
            if self.target is None or self.target < 0:
                raise ValueError("attack needs a non-negative target unit_id")
        elif self.kind not in ("noop", "stop"):
            raise ValueError(f"unknown command kind {self.kind!r}")

    @classmethod
    def noop(cls, unit_id: int) -> "UnitCommand":
        return cls(unit_id, "noop")

    @classmethod
    def stop(cls, unit_id: int) -> "UnitCommand":
        return cls(unit_id, "stop")

    @classmethod
    def move(cls, unit_id: int, direction: str) -> "UnitCommand":
        return cls(unit_id, "move", direction=direction)

    @classmethod
    def attack(cls, unit_id: int, target: int) -> "UnitCommand":
        return cls(unit_id, "attack", target=target)

    @property
    def code(self) -> int:
        """Action index in the ``[noop, stop, N, S, E, W, attack(0..)]`` layout."""
        if self.kind == "noop":
            return NOOP
        if self.kind == "stop":
            return STOP
        if self.kind == "move":
            return _DIR_CODE[self.direction]
        return ATTACK_BASE + self.target

    @classmethod
    def from_code(cls, unit_id: int, code: int) -> "UnitCommand":
        if code == NOOP:
            return cls.noop(unit_id)
        if code == STOP:
            return cls.stop(unit_id)
        if code < ATTACK_BASE:
            return cls.move(unit_id, DIRECTIONS[code - NORTH])
        return cls.attack(unit_id, code - ATTACK_BASE)


class DamageEvent(NamedTuple):
    attacker_player: int
    attacker_id: int
    target_id: int
    shield_damage: int
    hp_damage: int

    @property
    def total(self) -> int:
        return self.shield_damage + self.hp_damage


class StepOutcome(NamedTuple):
    damage_events: tuple[DamageEvent, ...]
    kills: tuple[tuple[int, int], ...]  # (player, unit_id)
    status_after: Status

    def damage_dealt_by(self, player: int) -> int:
        return sum(e.shield_damage + e.hp_damage for e in self.damage_events
                   if e.attacker_player == player)

    def kills_against(self, player: int) -> int:
        """Number of units *player* lost this step."""
        return sum(1 for p, _ in self.kills if p == player)


@dataclass(frozen=True)
class UnitState:
    """Read-only snapshot of one unit, in map units."""

    unit_id: int
    player: int
    archetype: UnitArchetype
    position: tuple[float, float]
    hp: int
    shield: int
    cooldown_remaining: int
    steps_since_damaged: int
    hate: dict[int, float] = field(compare=False)

    @property
    def alive(self) -> bool:
        return self.hp > 0


@dataclass(frozen=True, eq=True)
class Roster:
    """Static per-battle data: who is who, plus flattened stat columns."""

    config: ScenarioConfig
    players: tuple[int, ...] = field(init=False, compare=False)
    unit_ids: tuple[int, ...] = field(init=False, compare=False)
    archetypes: tuple[UnitArchetype, ...] = field(init=False, compare=False)

    def __post_init__(self):
        cfg = self.config
        archs = cfg.team1_roster + cfg.team2_roster
        n1 = len(cfg.team1_roster)
        s = object.__setattr__
        s(self, "archetypes", archs)
        s(self, "players", tuple(1 if g < n1 else 2 for g in range(len(archs))))
        s(self, "unit_ids", tuple(g if g < n1 else g - n1 for g in range(len(archs))))
        s(self, "n1", n1)
        s(self, "n2", len(cfg.team2_roster))
        s(self, "n", len(archs))
        s(self, "max_hp", tuple(a.max_hp for a in archs))
        s(self, "max_shield", tuple(a.max_shield for a in archs))
        s(self, "armor", tuple(a.armor for a in archs))
        s(self, "damage", tuple(a.damage for a in archs))
        s(self, "range_fx", tuple(a.range_fx for a in archs))
        s(self, "range2", tuple(a.range_fx ** 2 for a in archs))
        s(self, "sight_fx", tuple(a.sight_fx for a in archs))
        s(self, "sight2", tuple(a.sight_fx ** 2 for a in archs))
        s(self, "cooldown", tuple(a.cooldown_steps for a in archs))
        s(self, "speed", tuple(a.speed_fx for a in archs))
        s(self, "regen", tuple(a.shield_regen_rate for a in archs))
        s(self, "regen_delay", tuple(a.shield_regen_delay for a in archs))
        # first global index and count of each unit's enemies
        s(self, "enemy_base", tuple(n1 if g < n1 else 0 for g in range(len(archs))))
        s(self, "enemy_count", tuple(len(cfg.team2_roster) if g < n1 else n1
                                     for g in range(len(archs))))
        s(self, "width", to_fixed(cfg.map_width))
        s(self, "height", to_fixed(cfg.map_height))
        c1, c2 = cfg.team1_spawn.center, cfg.team2_spawn.center
        s(self, "spawn_center", {1: (to_fixed(c1[0]), to_fixed(c1[1])),
                                 2: (to_fixed(c2[0]), to_fixed(c2[1]))})
        s(self, "step_limit", cfg.step_limit)

    def offset(self, player: int) -> int:
        return 0 if player == 1 else self.n1

    def count(self, player: int) -> int:
        return self.n1 if player == 1 else self.n2

    def index(self, player: int, unit_id: int) -> int:
        if not 0 <= unit_id < self.count(player):
            raise ProtocolError(f"player {player} has no unit {unit_id}")
        return self.offset(player) + unit_id

    def team(self, player: int) -> range:
        off = self.offset(player)
        return range(off, off + self.count(player))


class BattleState(NamedTuple):
    """Full ground-truth world state.  Immutable; equality is exact."""

    roster: Roster
    step: int
    status: Status
    x: tuple[int, ...]
    y: tuple[int, ...]
    hp: tuple[int, ...]
    shield: tuple[int, ...]
    cooldown: tuple[int, ...]
    since_damaged: tuple[int, ...]
    hate: tuple[int, ...]  # n*n, hate[i*n + j]: hate of unit i toward unit j

    @property
    def config(self) -> ScenarioConfig:
        return self.roster.config

    def unit(self, player: int, unit_id: int) -> UnitState:
        r = self.roster
        g = r.index(player, unit_id)
        base = r.enemy_base[g]
        hate = {j - base: self.hate[g * r.n + j] / HATE_SCALE
                for j in range(base, base + r.enemy_count[g])}
        return UnitState(
            unit_id=unit_id, player=player, archetype=r.archetypes[g],
            position=(from_fixed(self.x[g]), from_fixed(self.y[g])),
            hp=self.hp[g], shield=self.shield[g],
            cooldown_remaining=self.cooldown[g],
            steps_since_damaged=self.since_damaged[g], hate=hate,
        )

    @property
    def units(self) -> tuple[UnitState, ...]:
        r = self.roster
        return tuple(self.unit(r.players[g], r.unit_ids[g]) for g in range(r.n))

    def living(self, player: int) -> list[int]:
        """Unit ids of *player* that are still alive."""
        r = self.roster
        off = r.offset(player)
        return [g - off for g in r.team(player) if self.hp[g] > 0]

    def alive_count(self, player: int) -> int:
        hp = self.hp
        return sum(1 for g in self.roster.team(player) if hp[g] > 0)

    def replace_unit(self, player: int, unit_id: int, *, position: tuple[float, float] | None = None,
                     hp: int | None = None, shield: int | None = None,
                     cooldown: int | None = None, since_damaged: int | None = None) -> "BattleState":
        """Copy with one unit edited (test fixtures, scenario surgery)."""
        g = self.roster.index(player, unit_id)
        arch = self.roster.archetypes[g]

        def put(seq, value):
            lst = list(seq)
            lst[g] = value
            return tuple(lst)

        st = self
        if position is not None:
            st = st._replace(x=put(st.x, to_fixed(position[0])), y=put(st.y, to_fixed(position[1])))
        if hp is not None:
            if not 0 <= hp <= arch.max_hp:
                raise ValueError("hp out of range")
            st = st._replace(hp=put(st.hp, hp))
        if shield is not None:
            if not 0 <= shield <= arch.max_shield:
                raise ValueError("shield out of range")
            st = st._replace(shield=put(st.shield, shield))
        if cooldown is not None:
            if not 0 <= cooldown <= arch.cooldown_steps:
                raise ValueError("cooldown out of range")
            st = st._replace(cooldown=put(st.cooldown, cooldown))
        if since_damaged is not None:
            st = st._replace(since_damaged=put(st.since_damaged, since_damaged))
        return st._replace(status=check_terminal(st))


def _lattice(region: tuple[int, int, int, int], n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    x0, y0, x1, y1 = region
    k = isqrt(max(n - 1, 0)) + 2
    slots = rng.permutation(k * k)[:n]
    out = []
    for s in slots.tolist():
        i, j = s % k, s // k
        out.append((x0 + (2 * i + 1) * (x1 - x0) // (2 * k),
                    y0 + (2 * j + 1) * (y1 - y0) // (2 * k)))
    return out


def load_scenario(config: ScenarioConfig, seed: int, roster: Roster | None = None) -> BattleState:
    """Fresh battle: every unit at full health on a seeded spawn lattice.

    Each team draws its lattice slots from its own generator keyed by
    ``(seed, player)``, so placement depends only on seed and roster order.
    A prebuilt *roster* for the same config may be passed to skip rebuilding.
    """
    if seed < 0:
        raise ConfigurationError("seed must be non-negative")
    if roster is None:
        config.validate()
        roster = Roster(config)
    elif roster.config is not config:
        raise ConfigurationError("roster was built for a different scenario")
    pos = (_lattice(config.team1_spawn.fixed(), roster.n1, np.random.default_rng([seed, 1]))
           + _lattice(config.team2_spawn.fixed(), roster.n2, np.random.default_rng([seed, 2])))
    n = roster.n
    return BattleState(
        roster=roster, step=0, status=Status.ONGOING,
        x=tuple(p[0] for p in pos), y=tuple(p[1] for p in pos),
        hp=roster.max_hp, shield=roster.max_shield,
        cooldown=(0,) * n, since_damaged=(0,) * n, hate=(0,) * (n * n),
    )


def move_unit(position: tuple, direction: str | int, move_speed, bounds: tuple) -> tuple:
    """Cardinal displacement by *move_speed*, clamped to ``[0, W] x [0, H]``.

    Works on any numeric type; the engine calls it with fixed-point ints.
    """
    code = _DIR_CODE[direction] if isinstance(direction, str) else direction
    ux, uy = _DIR_DELTA[code]
    x = min(max(position[0] + ux * move_speed, 0), bounds[0])
    y = min(max(position[1] + uy * move_speed, 0), bounds[1])
    return (x, y)


def check_terminal(state: BattleState) -> Status:
    r = state.roster
    hp = state.hp
    alive1 = any(hp[g] > 0 for g in range(r.n1))
    alive2 = any(hp[g] > 0 for g in range(r.n1, r.n))
    if not alive1 and not alive2:
        return Status.DRAW
    if not alive2:
        return Status.P1_WIN
    if not alive1:
        return Status.P2_WIN
    if state.step >= r.step_limit:
        return Status.DRAW
    return Status.ONGOING


def commands_to_codes(state: BattleState, commands_p1: Iterable[UnitCommand],
                      commands_p2: Iterable[UnitCommand]) -> list[int]:
    """Scatter id-tagged commands into a per-global-index code list.

    Every living unit needs exactly one command; dead units may be omitted
    or given ``noop``.
    """
    r = state.roster
    codes: list[int | None] = [None] * r.n
    for player, cmds in ((1, commands_p1), (2, commands_p2)):
        for cmd in cmds:
            if not 0 <= cmd.unit_id < r.count(player):
                raise ProtocolError(f"player {player} has no unit {cmd.unit_id}")
            g = r.offset(player) + cmd.unit_id
            if codes[g] is not None:
                raise ProtocolError(f"player {player} unit {cmd.unit_id} commanded twice")
            codes[g] = cmd.code
    for g in range(r.n):
        if codes[g] is None:
            if state.hp[g] > 0:
                raise ProtocolError(
                    f"missing command for living unit {r.unit_ids[g]} of player {r.players[g]}")
            codes[g] = NOOP
    return codes


def validate_codes(state: BattleState, codes: Sequence[int]) -> None:
    r = state.roster
    if len(codes) != r.n:
        raise ProtocolError(f"expected {r.n} commands, got {len(codes)}")
    hp = state.hp
    for g, c in enumerate(codes):
        if hp[g] <= 0:
            if c != NOOP:
                raise IllegalActionError(
                    f"player {r.players[g]} unit {r.unit_ids[g]} is dead; only noop is legal",
                    player=r.players[g], agent=r.unit_ids[g], action=c)
        elif c >= ATTACK_BASE:
            k = c - ATTACK_BASE
            if k >= r.enemy_count[g]:
                raise IllegalActionError(
                    f"player {r.players[g]} unit {r.unit_ids[g]}: no enemy unit {k}",
                    player=r.players[g], agent=r.unit_ids[g], action=c)
            if hp[r.enemy_base[g] + k] <= 0:
                raise IllegalActionError(
                    f"player {r.players[g]} unit {r.unit_ids[g]}: enemy unit {k} is dead",
                    player=r.players[g], agent=r.unit_ids[g], action=c)
        elif c < 0:
            raise IllegalActionError(f"negative action {c}", player=r.players[g],
                                     agent=r.unit_ids[g], action=c)


def step(state: BattleState, commands_p1: Sequence[UnitCommand],
         commands_p2: Sequence[UnitCommand]) -> tuple[BattleState, StepOutcome]:
    """Advance one environment step with id-tagged commands for both players."""
    if state.status is not Status.ONGOING:
        raise ProtocolError("battle is already over")
    codes = commands_to_codes(state, commands_p1, commands_p2)
    validate_codes(state, codes)
    return _advance(state, codes)


def step_codes(state: BattleState, codes: Sequence[int], *, validate: bool = True
               ) -> tuple[BattleState, StepOutcome]:
    """Fast path: one action code per global unit index."""
    if state.status is not Status.ONGOING:
        raise ProtocolError("battle is already over")
    if validate:
        validate_codes(state, codes)
    return _advance(state, codes)


# named-tuple construction without the per-field Python wrapper; hot path only
_new_tuple = tuple.__new__


def _advance(state: BattleState, codes: Sequence[int]) -> tuple[BattleState, StepOutcome]:
    r = state.roster
    n = r.n
    xs, ys, hp, sh, cd = state.x, state.y, state.hp, state.shield, state.cooldown
    nx, ny = list(xs), list(ys)
    ncd = list(cd)
    width, height = r.width, r.height
    enemy_base, range2, cooldown, speed = r.enemy_base, r.range2, r.cooldown, r.speed
    shots: list[tuple[int, int]] = []

    for g in range(n):
        if hp[g] <= 0:
            continue
        c = codes[g]
        if c >= ATTACK_BASE:
            t = enemy_base[g] + c - ATTACK_BASE
            dx = xs[t] - xs[g]
            dy = ys[t] - ys[g]
            d2 = dx * dx + dy * dy
            if d2 <= range2[g]:
                if cd[g] == 0:
                    shots.append((g, t))
                    ncd[g] = cooldown[g] - 1 if cooldown[g] > 0 else 0
                    continue
            else:
                # out of range: close in along the straight line
                d = isqrt(d2)
                length = min(speed[g], d - r.range_fx[g] * APPROACH_NUM // APPROACH_DEN)
                if length > 0:
                    mx = abs(dx) * length // d
                    my = abs(dy) * length // d
                    nx[g] = min(max(xs[g] + (mx if dx >= 0 else -mx), 0), width)
                    ny[g] = min(max(ys[g] + (my if dy >= 0 else -my), 0), height)
        elif c >= NORTH:
            sp = speed[g]
            if c == NORTH:
                v = ys[g] + sp
                ny[g] = v if v < height else height
            elif c == SOUTH:
                v = ys[g] - sp
                ny[g] = v if v > 0 else 0
            elif c == EAST:
                v = xs[g] + sp
                nx[g] = v if v < width else width
            else:
                v = xs[g] - sp
                nx[g] = v if v > 0 else 0
        if cd[g] > 0:
            ncd[g] = cd[g] - 1

    nhp = list(hp)
    nsh = list(sh)
    damaged = [False] * n
    events = []
    if any(state.hate):
        hate = [h * HATE_DECAY_NUM // HATE_DECAY_DEN for h in state.hate]
    else:
        hate = list(state.hate)
    armor, damage, players, uids = r.armor, r.damage, r.players, r.unit_ids
    for g, t in shots:
        amount = damage[g] - armor[t]
        if amount < 1:
            amount = 1
        s = nsh[t]
        to_shield = amount if amount <= s else s
        rest = amount - to_shield
        h = nhp[t]
        to_hp = rest if rest <= h else h
        nsh[t] = s - to_shield
        nhp[t] = h - to_hp
        damaged[t] = True
        dealt = to_shield + to_hp
        if dealt:
            hate[t * n + g] += dealt * HATE_SCALE
        events.append(_new_tuple(DamageEvent, (players[g], uids[g], uids[t], to_shield, to_hp)))

    nsince = list(state.since_damaged)
    kills = []
    alive1 = alive2 = False
    n1 = r.n1
    regen, delay, max_shield = r.regen, r.regen_delay, r.max_shield
    for g in range(n):
        if hp[g] <= 0:
            continue
        if nhp[g] <= 0:
            kills.append((players[g], uids[g]))
            continue
        if g < n1:
            alive1 = True
        else:
            alive2 = True
        since = 0 if damaged[g] else nsince[g] + 1
        nsince[g] = since
        if regen[g] and since >= delay[g] and nsh[g] < max_shield[g]:
            nsh[g] = min(max_shield[g], nsh[g] + regen[g])

    t = state.step + 1
    if alive1 and alive2:
        status = Status.ONGOING if t < r.step_limit else Status.DRAW
    elif alive1:
        status = Status.P1_WIN
    elif alive2:
        status = Status.P2_WIN
    else:
        status = Status.DRAW
    new = _new_tuple(BattleState, (r, t, status, tuple(nx), tuple(ny), tuple(nhp),
                                   tuple(nsh), tuple(ncd), tuple(nsince), tuple(hate)))
    return new, _new_tuple(StepOutcome, (tuple(events), tuple(kills), status))
