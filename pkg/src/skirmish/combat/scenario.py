"""Scenario configuration: map, spawn regions, rosters, limits."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import ConfigurationError
from .units import UnitArchetype, UnitTable, default_unit_table, to_fixed


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle in map units, ``x0 < x1`` and ``y0 < y1``."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def fixed(self) -> tuple[int, int, int, int]:
        return to_fixed(self.x0), to_fixed(self.y0), to_fixed(self.x1), to_fixed(self.y1)

    def overlaps(self, other: "Region") -> bool:
        return (self.x0 < other.x1 and other.x0 < self.x1
                and self.y0 < other.y1 and other.y0 < self.y1)

    def to_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]

    @classmethod
    def from_seq(cls, seq: Sequence[float]) -> "Region":
        if len(seq) != 4:
            raise ConfigurationError(f"region needs 4 numbers, got {list(seq)!r}")
        return cls(*(float(v) for v in seq))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    map_width: float
    map_height: float
    team1_spawn: Region
    team2_spawn: Region
    team1_roster: tuple[UnitArchetype, ...]
    team2_roster: tuple[UnitArchetype, ...]
    step_limit: int
    difficulty: int = 7
    description: str = field(default="", compare=False)

    @property
    def n_agents(self) -> int:
        return len(self.team1_roster)

    @property
    def n_enemies(self) -> int:
        return len(self.team2_roster)

    def roster(self, player: int) -> tuple[UnitArchetype, ...]:
        return self.team1_roster if player == 1 else self.team2_roster

    def spawn(self, player: int) -> Region:
        return self.team1_spawn if player == 1 else self.team2_spawn

    def archetype_names(self) -> tuple[str, ...]:
        """Sorted union of archetype names used by either team."""
        return tuple(sorted({a.name for a in self.team1_roster + self.team2_roster}))

    def validate(self) -> None:
        if self.map_width <= 0 or self.map_height <= 0:
            raise ConfigurationError("map dimensions must be positive")
        for label, reg in (("team1_spawn", self.team1_spawn), ("team2_spawn", self.team2_spawn)):
            if not (reg.x0 < reg.x1 and reg.y0 < reg.y1):
                raise ConfigurationError(f"{label} is degenerate: {reg.to_list()}")
            if reg.x0 < 0 or reg.y0 < 0 or reg.x1 > self.map_width or reg.y1 > self.map_height:
                raise ConfigurationError(f"{label} {reg.to_list()} lies outside the map")
        if self.team1_spawn.overlaps(self.team2_spawn):
            raise ConfigurationError("spawn regions overlap")
        if not self.team1_roster or not self.team2_roster:
            raise ConfigurationError("rosters must be non-empty")
        if self.step_limit <= 0:
            raise ConfigurationError("step_limit must be > 0")
        if not 1 <= self.difficulty <= 7:
            raise ConfigurationError("difficulty must be in 1..7")

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "name": self.name,
            "description": self.description,
            "map": {"width": self.map_width, "height": self.map_height},
            "team1_spawn": self.team1_spawn.to_list(),
            "team2_spawn": self.team2_spawn.to_list(),
            "team1_roster": [a.name for a in self.team1_roster],
            "team2_roster": [a.name for a in self.team2_roster],
            "step_limit": self.step_limit,
            "difficulty": self.difficulty,
        }

    def config_hash(self) -> str:
        """Digest over the scenario record and the stats of every archetype it uses."""
        doc = self.to_dict()
        doc.pop("description")
        doc["archetypes"] = {a.name: a.to_dict() for a in self.team1_roster + self.team2_roster}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: Mapping, unit_table: UnitTable | None = None) -> "ScenarioConfig":
        table = unit_table if unit_table is not None else default_unit_table()
        if d.get("version", 1) != 1:
            raise ConfigurationError(f"unsupported scenario version {d.get('version')!r}")

        def roster(key: str) -> tuple[UnitArchetype, ...]:
            names = d.get(key)
            if not isinstance(names, list):
                raise ConfigurationError(f"{key} must be a list of archetype names")
            out = []
            for n in names:
                if n not in table:
                    raise ConfigurationError(f"{key}: unknown archetype {n!r}")
                out.append(table[n])
            return tuple(out)

        try:
            cfg = cls(
                name=str(d["name"]),
                map_width=float(d["map"]["width"]),
                map_height=float(d["map"]["height"]),
                team1_spawn=Region.from_seq(d["team1_spawn"]),
                team2_spawn=Region.from_seq(d["team2_spawn"]),
                team1_roster=roster("team1_roster"),
                team2_roster=roster("team2_roster"),
                step_limit=int(d["step_limit"]),
                difficulty=int(d.get("difficulty", 7)),
                description=str(d.get("description", "")),
            )
        except KeyError as exc:
            raise ConfigurationError(f"scenario record missing field {exc.args[0]!r}") from None
        cfg.validate()
        return cfg


def load_scenario_config(ref: str | Path, unit_table: UnitTable | None = None) -> ScenarioConfig:
    """Load a scenario by shipped name (``"3s_vs_5z"``) or by file path."""
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        text = path.read_text()
    else:
        res = resources.files("skirmish.data").joinpath("scenarios", f"{ref}.json")
        if not res.is_file():
            raise ConfigurationError(f"unknown scenario {str(ref)!r}")
        text = res.read_text()
    return ScenarioConfig.from_dict(json.loads(text), unit_table)


def shipped_scenarios() -> list[str]:
    root = resources.files("skirmish.data").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
