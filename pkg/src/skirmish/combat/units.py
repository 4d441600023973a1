"""Unit archetypes and the shipped stat table.

Distances and speeds are stored as fixed-point integers (``SCALE`` sub-units
per map unit) so that the engine never touches floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import ConfigurationError

SCALE = 1000

_FIELDS = (
    "max_hp", "max_shield", "armor", "damage", "attack_range", "sight_range",
    "cooldown_steps", "move_speed", "shield_regen_rate", "shield_regen_delay",
)


def to_fixed(value: float) -> int:
    """Map units -> fixed-point sub-units (round half away from zero)."""
    scaled = abs(value) * SCALE
    out = int(scaled + 0.5)
    return out if value >= 0 else -out


def from_fixed(value: int) -> float:
    return value / SCALE


@dataclass(frozen=True)
class UnitArchetype:
    name: str
    max_hp: int
    max_shield: int
    armor: int
    damage: int
    attack_range: float
    sight_range: float
    cooldown_steps: int
    move_speed: float
    shield_regen_rate: int = 0
    shield_regen_delay: int = 0

    def __post_init__(self):
        for f in _FIELDS:
            if getattr(self, f) < 0:
                raise ConfigurationError(f"archetype {self.name!r}: {f} must be >= 0")
        if self.max_hp <= 0:
            raise ConfigurationError(f"archetype {self.name!r}: max_hp must be > 0")
        if self.move_speed == 0 and self.attack_range == 0:
            raise ConfigurationError(
                f"archetype {self.name!r}: move_speed and attack_range cannot both be 0")
        if self.attack_range > self.sight_range:
            raise ConfigurationError(
                f"archetype {self.name!r}: attack_range exceeds sight_range")
        for f in ("max_hp", "max_shield", "armor", "damage", "cooldown_steps",
                  "shield_regen_rate", "shield_regen_delay"):
            if int(getattr(self, f)) != getattr(self, f):
                raise ConfigurationError(f"archetype {self.name!r}: {f} must be an integer")

    # fixed-point views used by the engine
    @property
    def range_fx(self) -> int:
        return to_fixed(self.attack_range)

    @property
    def sight_fx(self) -> int:
        return to_fixed(self.sight_range)

    @property
    def speed_fx(self) -> int:
        return to_fixed(self.move_speed)

    def to_dict(self) -> dict:
        return {"name": self.name, **{f: getattr(self, f) for f in _FIELDS}}

    @classmethod
    def from_dict(cls, d: Mapping) -> "UnitArchetype":
        unknown = set(d) - set(_FIELDS) - {"name"}
        if unknown:
            raise ConfigurationError(f"archetype record has unknown fields {sorted(unknown)}")
        try:
            return cls(
                name=str(d["name"]),
                max_hp=int(d["max_hp"]),
                max_shield=int(d.get("max_shield", 0)),
                armor=int(d.get("armor", 0)),
                damage=int(d["damage"]),
                attack_range=float(d["attack_range"]),
                sight_range=float(d["sight_range"]),
                cooldown_steps=int(d["cooldown_steps"]),
                move_speed=float(d["move_speed"]),
                shield_regen_rate=int(d.get("shield_regen_rate", 0)),
                shield_regen_delay=int(d.get("shield_regen_delay", 0)),
            )
        except KeyError as exc:
            raise ConfigurationError(f"archetype record missing field {exc.args[0]!r}") from None


UnitTable = dict[str, UnitArchetype]


def parse_unit_table(doc: Mapping) -> UnitTable:
    """Build a table from the ``{"version": 1, "archetypes": [...]}`` document."""
    if doc.get("version") != 1:
        raise ConfigurationError(f"unsupported unit table version {doc.get('version')!r}")
    table: UnitTable = {}
    for rec in doc.get("archetypes", []):
        arch = UnitArchetype.from_dict(rec)
        if arch.name in table:
            raise ConfigurationError(f"duplicate archetype {arch.name!r}")
        table[arch.name] = arch
    if not table:
        raise ConfigurationError("unit table is empty")
    return table


def load_unit_table(path: str | Path | None = None) -> UnitTable:
    """Load a unit table file; ``None`` loads the shipped default table."""
    if path is None:
        text = resources.files("skirmish.data").joinpath("units.json").read_text()
    else:
        text = Path(path).read_text()
    return parse_unit_table(json.loads(text))


_DEFAULT_TABLE: UnitTable | None = None


def default_unit_table() -> UnitTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = load_unit_table()
    return dict(_DEFAULT_TABLE)
