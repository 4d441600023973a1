"""JSON-lines replay logs: write, read, re-simulate and render.

Format (version 1), one JSON object per line:

* ``{"type": "header", "format": "skirmish-replay", "version": 1, "scenario": {...},
  "archetypes": {...}, "seed": s, "script_index": i|null, "config_hash": h,
  "initial": <state>}``
* one ``{"type": "step", "step": t, "commands": [...], "damage": [...],
  "kills": [...], "state": <state>}`` per environment step, where ``commands``
  holds one world-frame action code per global unit index and ``damage``
  lists ``[attacker_player, attacker_id, target_id, shield, hp]``
* optionally a final ``{"type": "result", "winner": ..., "steps": n}``

A ``<state>`` is ``{"step", "status", "x", "y", "hp", "shield", "cooldown",
"since_damaged", "hate"}`` with positions in milli map units.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..combat.engine import BattleState, Roster, Status, StepOutcome, load_scenario, step_codes
from ..combat.scenario import ScenarioConfig
from ..combat.units import SCALE, UnitArchetype
from ..errors import ReplayFormatError, SkirmishError

REPLAY_FORMAT = "skirmish-replay"
REPLAY_VERSION = 1
_STATE_KEYS = ("x", "y", "hp", "shield", "cooldown", "since_damaged", "hate")


def state_record(st: BattleState) -> dict:
    rec = {"step": st.step, "status": st.status.value}
    for k in _STATE_KEYS:
        rec[k] = list(getattr(st, k))
    return rec


def _same_state(st: BattleState, rec: dict) -> bool:
    if st.step != rec["step"] or st.status.value != rec["status"]:
        return False
    return all(list(getattr(st, k)) == rec[k] for k in _STATE_KEYS)


@dataclass
class ReplayLog:
    scenario: ScenarioConfig
    seed: int
    script_index: int | None
    config_hash: str
    initial: dict
    steps: list[dict] = field(default_factory=list)
    result: dict | None = None

    @classmethod
    def start(cls, state: BattleState, seed: int, script_index: int | None) -> "ReplayLog":
        cfg = state.config
        return cls(cfg, seed, script_index, cfg.config_hash(), state_record(state))

    def record(self, codes: list[int], outcome: StepOutcome, state: BattleState) -> None:
        self.steps.append({
            "type": "step", "step": state.step, "commands": list(codes),
            "damage": [list(e) for e in outcome.damage_events],
            "kills": [list(k) for k in outcome.kills],
            "state": state_record(state),
        })

    def finish(self, winner: str, steps: int) -> None:
        self.result = {"type": "result", "winner": winner, "steps": steps}

    def header(self) -> dict:
        cfg = self.scenario
        return {
            "type": "header", "format": REPLAY_FORMAT, "version": REPLAY_VERSION,
            "scenario": cfg.to_dict(),
            "archetypes": {a.name: a.to_dict() for a in cfg.team1_roster + cfg.team2_roster},
            "seed": self.seed, "script_index": self.script_index,
            "config_hash": self.config_hash, "initial": self.initial,
        }

    def records(self) -> list[dict]:
        out = [self.header(), *self.steps]
        if self.result is not None:
            out.append(self.result)
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ReplayLog) and self.records() == other.records()


def write_replay(log: ReplayLog, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w") as fh:
        for rec in log.records():
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    return p


def _require(rec: Any, keys: tuple[str, ...], index: int) -> None:
    if not isinstance(rec, dict):
        raise ReplayFormatError("record is not a JSON object", index)
    missing = [k for k in keys if k not in rec]
    if missing:
        raise ReplayFormatError(f"missing field(s) {', '.join(missing)}", index)


def read_replay(path: str | Path) -> ReplayLog:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ReplayFormatError("empty replay file", 0)
    recs = []
    for i, line in enumerate(lines):
        try:
            recs.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ReplayFormatError(f"invalid JSON ({exc.msg})", i) from None
    head = recs[0]
    _require(head, ("type", "format", "version", "scenario", "archetypes", "seed", "initial"), 0)
    if head["type"] != "header" or head["format"] != REPLAY_FORMAT:
        raise ReplayFormatError("first record must be a skirmish-replay header", 0)
    if head["version"] != REPLAY_VERSION:
        raise ReplayFormatError(f"unsupported replay version {head['version']!r}", 0)
    try:
        table = {n: UnitArchetype.from_dict(d) for n, d in head["archetypes"].items()}
        scenario = ScenarioConfig.from_dict(head["scenario"], table)
    except (SkirmishError, KeyError, TypeError, ValueError) as exc:
        raise ReplayFormatError(f"bad scenario in header: {exc}", 0) from None
    log = ReplayLog(scenario, int(head["seed"]), head.get("script_index"),
                    head.get("config_hash", ""), head["initial"])
    for i, rec in enumerate(recs[1:], start=1):
        _require(rec, ("type",), i)
        if rec["type"] == "step":
            _require(rec, ("step", "commands", "damage", "kills", "state"), i)
            if log.result is not None:
                raise ReplayFormatError("step record after the result record", i)
            log.steps.append(rec)
        elif rec["type"] == "result":
            _require(rec, ("winner", "steps"), i)
            log.result = rec
        else:
            raise ReplayFormatError(f"unknown record type {rec['type']!r}", i)
    return log


def verify_replay(log: ReplayLog) -> bool:
    """Re-simulate the logged commands; True iff every logged state matches exactly."""
    st = load_scenario(log.scenario, log.seed)
    if not _same_state(st, log.initial):
        return False
    for rec in log.steps:
        if st.status is not Status.ONGOING:
            return False
        st, outcome = step_codes(st, rec["commands"])
        if not _same_state(st, rec["state"]):
            return False
        if [list(e) for e in outcome.damage_events] != rec["damage"]:
            return False
    return True


def render_replay(log: ReplayLog, *, every: int = 1, cell: float = 1.0) -> str:
    """ASCII storyboard: one top-down frame per *every* steps.

    Team-1 units draw as upper-case initials, team-2 units as lower-case;
    north is up.
    """
    cfg = log.scenario
    roster = Roster(cfg)
    w = max(1, int(cfg.map_width / cell))
    h = max(1, int(cfg.map_height / cell))
    head = (f"replay {cfg.name} seed={log.seed} script={log.script_index} "
            f"hash={log.config_hash} steps={len(log.steps)}")
    out = [head]

    def frame(rec: dict) -> None:
        grid = [["."] * (w + 1) for _ in range(h + 1)]
        for g in range(roster.n):
            if rec["hp"][g] <= 0:
                continue
            ch = roster.archetypes[g].name[0]
            ch = ch.upper() if roster.players[g] == 1 else ch.lower()
            cx = min(w, int(rec["x"][g] / SCALE / cell))
            cy = min(h, int(rec["y"][g] / SCALE / cell))
            grid[h - cy][cx] = ch
        pools = " ".join(f"{rec['hp'][g]}+{rec['shield'][g]}" for g in range(roster.n))
        out.append(f"-- step {rec['step']} [{rec['status']}] hp+shield: {pools}")
        out.extend("".join(row) for row in grid)

    if log.steps:
        frame(log.initial)
        for i, rec in enumerate(log.steps, start=1):
            if i % every == 0 or i == len(log.steps):
                frame(rec["state"])
    if log.result is not None:
        out.append(f"result: {log.result['winner']} after {log.result['steps']} steps")
    return "\n".join(out) + "\n"
