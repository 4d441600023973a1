"""Evaluate decision trees against ground-truth battle state.

Comparisons are exact: thresholds are rationals and quantities are compared in
the engine's integer units, so evaluation never depends on float rounding.
Every target choice breaks ties by the lowest enemy unit_id.
"""

from __future__ import annotations

import operator
from fractions import Fraction
from typing import Callable

from ..combat.engine import (
    ATTACK_BASE, EAST, NORTH, SOUTH, STOP, WEST, BattleState, UnitCommand, _DIR_DELTA,
)
from ..combat.units import SCALE
from .parser import And, Compare, Condition, DecisionTree, Flag, Not, Or

_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge,
        "==": operator.eq, "!=": operator.ne}


def _exact(v: Fraction):
    return v.numerator if v.denominator == 1 else v


class _UnitView:
    """Per-unit lazy view over one state; quantities are computed on demand."""

    __slots__ = ("state", "g", "enemies", "_nearest")

    def __init__(self, state: BattleState, g: int, enemies: list[int]):
        self.state = state
        self.g = g
        self.enemies = enemies
        self._nearest = None

    def nearest(self) -> tuple[int, int]:
        """(squared distance, global index) of the nearest living enemy."""
        if self._nearest is None:
            st, g = self.state, self.g
            gx, gy = st.x[g], st.y[g]
            xs, ys = st.x, st.y
            best = None
            for e in self.enemies:  # ascending index == ascending unit_id
                dx = xs[e] - gx
                dy = ys[e] - gy
                d2 = dx * dx + dy * dy
                if best is None or d2 < best[0]:
                    best = (d2, e)
            self._nearest = best if best is not None else (-1, -1)
        return self._nearest

    def in_range_count(self) -> int:
        st, g = self.state, self.g
        r2 = st.roster.range2[g]
        gx, gy = st.x[g], st.y[g]
        xs, ys = st.x, st.y
        return sum(1 for e in self.enemies
                   if (xs[e] - gx) ** 2 + (ys[e] - gy) ** 2 <= r2)


def _compile_condition(cond: Condition) -> Callable[[_UnitView], bool]:
    if isinstance(cond, Flag):  # only cooldown_ready exists
        return lambda v: v.state.cooldown[v.g] == 0
    if isinstance(cond, Not):
        inner = _compile_condition(cond.operand)
        return lambda v: not inner(v)
    if isinstance(cond, And):
        parts = [_compile_condition(c) for c in cond.operands]
        return lambda v: all(p(v) for p in parts)
    if isinstance(cond, Or):
        parts = [_compile_condition(c) for c in cond.operands]
        return lambda v: any(p(v) for p in parts)
    assert isinstance(cond, Compare)
    op = _OPS[cond.op]
    value = cond.value
    q = cond.quantity
    if q == "distance_to_nearest_enemy":
        # d op T  <=>  d^2 op T^2 for non-negative d and T
        t2 = _exact((value * SCALE) ** 2)

        def dist(v):
            d2 = v.nearest()[0]
            if d2 < 0:  # no living enemy: distance is infinite
                return op(float("inf"), 0)
            return op(d2, t2)
        return dist
    if q == "hp_fraction":
        return lambda v: op(v.state.hp[v.g], _exact(value * v.state.roster.max_hp[v.g]))
    if q == "shield_fraction":
        def shield(v):
            ms = v.state.roster.max_shield[v.g]
            if ms == 0:
                return op(0, _exact(value))
            return op(v.state.shield[v.g], _exact(value * ms))
        return shield
    if q == "enemies_in_range":
        target = _exact(value)
        return lambda v: op(v.in_range_count(), target)
    if q == "step_count":
        target = _exact(value)
        return lambda v: op(v.state.step, target)
    raise AssertionError(q)


def _toward(v: _UnitView, point: tuple[int, int]) -> int:
    st, g = v.state, v.g
    dx = point[0] - st.x[g]
    dy = point[1] - st.y[g]
    half = st.roster.speed[g] // 2
    if abs(dx) <= half and abs(dy) <= half:
        return STOP
    if abs(dx) >= abs(dy):
        return EAST if dx > 0 else WEST
    return NORTH if dy > 0 else SOUTH


def _away(v: _UnitView) -> int:
    """Cardinal move maximizing the post-move distance to the nearest enemy."""
    st, g = v.state, v.g
    r = st.roster
    sp = r.speed[g]
    xs, ys = st.x, st.y
    best_code, best_d2 = STOP, -1
    for code in (NORTH, SOUTH, EAST, WEST):
        ux, uy = _DIR_DELTA[code]
        px = min(max(xs[g] + ux * sp, 0), r.width)
        py = min(max(ys[g] + uy * sp, 0), r.height)
        m = min((xs[e] - px) ** 2 + (ys[e] - py) ** 2 for e in v.enemies)
        if m > best_d2:
            best_code, best_d2 = code, m
    return best_code


def _attack(v: _UnitView, e: int) -> int:
    return ATTACK_BASE + e - v.state.roster.enemy_base[v.g]


def _act_nearest(v):
    return _attack(v, v.nearest()[1])


def _act_weakest(v):
    st = v.state
    hp, sh = st.hp, st.shield
    e = min(v.enemies, key=lambda e: (hp[e] + sh[e], e))
    return _attack(v, e)


def _act_hate(v):
    st, g = v.state, v.g
    row = g * st.roster.n
    best, best_h = -1, 0
    for e in v.enemies:
        h = st.hate[row + e]
        if h > best_h:
            best, best_h = e, h
    if best < 0:
        return _act_nearest(v)
    return _attack(v, best)


def _act_focus(v):
    return _attack(v, v.enemies[0])


def _act_enemy_spawn(v):
    other = 2 if v.state.roster.players[v.g] == 1 else 1
    return _toward(v, v.state.roster.spawn_center[other])


def _act_own_spawn(v):
    return _toward(v, v.state.roster.spawn_center[v.state.roster.players[v.g]])


_ACTIONS: dict[str, Callable[[_UnitView], int]] = {
    "attack_nearest": _act_nearest,
    "attack_weakest": _act_weakest,
    "attack_highest_hate": _act_hate,
    "attack_focus": _act_focus,
    "move_toward_enemy_spawn": _act_enemy_spawn,
    "move_toward_own_spawn": _act_own_spawn,
    "move_away_from_nearest_enemy": _away,
    "hold": lambda v: STOP,
}


class CompiledTree:
    """Closure form of a tree; cached per tree object."""

    def __init__(self, tree: DecisionTree):
        self.rules = [(_compile_condition(r.condition), _ACTIONS[r.action]) for r in tree.rules]
        self.fallback = _ACTIONS[tree.fallback]

    def decide(self, view: _UnitView) -> int:
        for cond, act in self.rules:
            if cond(view):
                return act(view)
        return self.fallback(view)


_CACHE: dict[int, tuple[DecisionTree, CompiledTree]] = {}


def compile_tree(tree: DecisionTree) -> CompiledTree:
    hit = _CACHE.get(id(tree))
    if hit is not None and hit[0] is tree:
        return hit[1]
    ct = CompiledTree(tree)
    if len(_CACHE) > 4096:
        _CACHE.clear()
    _CACHE[id(tree)] = (tree, ct)
    return ct


def script_codes(tree: DecisionTree, state: BattleState, player: int,
                 only: set[int] | None = None) -> dict[int, int]:
    """Action code per living unit_id of *player* (optionally a subset)."""
    ct = compile_tree(tree)
    r = state.roster
    other = 2 if player == 1 else 1
    hp = state.hp
    enemies = [e for e in r.team(other) if hp[e] > 0]
    off = r.offset(player)
    out = {}
    if not enemies:
        for g in r.team(player):
            if hp[g] > 0 and (only is None or g - off in only):
                out[g - off] = STOP
        return out
    for g in r.team(player):
        if hp[g] > 0 and (only is None or g - off in only):
            out[g - off] = ct.decide(_UnitView(state, g, enemies))
    return out


def evaluate_script(tree: DecisionTree, state: BattleState, player: int) -> list[UnitCommand]:
    """One legal command per living unit of *player*, in unit_id order."""
    return [UnitCommand.from_code(uid, code)
            for uid, code in script_codes(tree, state, player).items()]
