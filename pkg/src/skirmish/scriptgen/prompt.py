"""Environment prompt assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from ..combat.scenario import ScenarioConfig
from ..combat.units import UnitArchetype, UnitTable

RED_TAG = "red"
BLUE_TAG = "blue"


@dataclass(frozen=True)
class PromptBundle:
    system: str
    messages: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def with_messages(self, messages) -> "PromptBundle":
        return PromptBundle(self.system, tuple((r, t) for r, t in messages))

    def to_dict(self) -> dict:
        return {"system": self.system, "messages": [list(m) for m in self.messages]}


def grammar_text() -> str:
    return resources.files("skirmish.script").joinpath("GRAMMAR.md").read_text()


def _stat_block(a: UnitArchetype) -> str:
    return "\n".join([
        f"### {a.name}",
        f"- hit points: {a.max_hp}",
        f"- shield: {a.max_shield} (regenerates {a.shield_regen_rate}/step after "
        f"{a.shield_regen_delay} steps without damage)",
        f"- armor: {a.armor}",
        f"- damage per shot: {a.damage}",
        f"- attack range: {a.attack_range:g}",
        f"- sight range: {a.sight_range:g}",
        f"- cooldown: fires once every {a.cooldown_steps} step(s)",
        f"- speed: {a.move_speed:g} map units per step",
    ])


def _roster_line(roster) -> str:
    counts: dict[str, int] = {}
    for a in roster:
        counts[a.name] = counts.get(a.name, 0) + 1
    return ", ".join(f"{n} x {name}" for name, n in counts.items())


def build_env_prompt(scenario: ScenarioConfig, unit_table: UnitTable | None = None) -> PromptBundle:
    """System prompt with unit information, map information and the task.

    Stats come from *unit_table* when given, else from the scenario's own
    archetypes.  The result is a pure function of its arguments.
    """
    by_name = {a.name: a for a in scenario.team1_roster + scenario.team2_roster}
    if unit_table is not None:
        by_name = {n: unit_table.get(n, a) for n, a in by_name.items()}
    s1, s2 = scenario.team1_spawn, scenario.team2_spawn
    parts = [
        "You write unit-control scripts for a two-team real-time combat simulator.",
        "",
        "## Unit information",
        *(_stat_block(by_name[n]) + "\n" for n in sorted(by_name)),
        "## Map information",
        f"- scenario: {scenario.name}",
        f"- map size: {scenario.map_width:g} x {scenario.map_height:g}; x grows east, y grows north",
        f"- {RED_TAG} team (player 1) spawns in x {s1.x0:g}..{s1.x1:g}, y {s1.y0:g}..{s1.y1:g}"
        f" with {_roster_line(scenario.team1_roster)}",
        f"- {BLUE_TAG} team (player 2) spawns in x {s2.x0:g}..{s2.x1:g}, y {s2.y0:g}..{s2.y1:g}"
        f" with {_roster_line(scenario.team2_roster)}",
        "",
        "## Task description",
        "A side wins when the other side has no remaining units. "
        f"After {scenario.step_limit} steps the episode ends in a draw.",
        f"Write one script for the {RED_TAG} team and one for the {BLUE_TAG} team. "
        "Each script must be valid in the language below.",
        "",
        "## Script language reference",
        grammar_text(),
    ]
    return PromptBundle("\n".join(parts))
