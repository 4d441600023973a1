"""Deterministic combat engine: archetypes, scenarios, stepping."""

from .engine import (
    ATTACK_BASE, DIRECTIONS, EAST, NOOP, NORTH, SOUTH, STOP, WEST,
    BattleState, DamageEvent, Roster, Status, StepOutcome, UnitCommand, UnitState,
    check_terminal, commands_to_codes, load_scenario, move_unit, step, step_codes,
)
from .scenario import Region, ScenarioConfig, load_scenario_config, shipped_scenarios
from .units import SCALE, UnitArchetype, default_unit_table, from_fixed, load_unit_table, to_fixed

__all__ = [
    "ATTACK_BASE", "DIRECTIONS", "EAST", "NOOP", "NORTH", "SOUTH", "STOP", "WEST",
    "BattleState", "DamageEvent", "Roster", "Status", "StepOutcome", "UnitCommand",
    "UnitState", "check_terminal", "commands_to_codes", "load_scenario", "move_unit",
    "step", "step_codes", "Region", "ScenarioConfig", "load_scenario_config",
    "shipped_scenarios", "SCALE", "UnitArchetype", "default_unit_table", "from_fixed",
    "load_unit_table", "to_fixed",
]
