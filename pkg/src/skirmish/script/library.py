"""Built-in opponent scripts, shipped as DSL source files."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..errors import SkirmishError
from .parser import DecisionTree, ScriptSource, parse_script

BUILTIN_NAMES = (
    "default_team1_attack",
    "hate_attack",
    "attack_nearest",
    "attack_weakest",
    "focus_fire",
    "kite",
)


class UnknownScriptError(SkirmishError, LookupError):
    pass


def builtin_source(name: str) -> ScriptSource:
    if name not in BUILTIN_NAMES:
        raise UnknownScriptError(f"no built-in script named {name!r}")
    text = resources.files("skirmish.data").joinpath("scripts", f"{name}.dsl").read_text()
    return ScriptSource(text, name)


@lru_cache(maxsize=None)
def builtin_script(name: str) -> DecisionTree:
    return parse_script(builtin_source(name))


def builtin_scripts() -> dict[str, DecisionTree]:
    return {name: builtin_script(name) for name in BUILTIN_NAMES}


def load_script(ref: str | Path) -> DecisionTree:
    """Resolve a reserved built-in name or a path to a ``.dsl`` file."""
    if isinstance(ref, str) and ref in BUILTIN_NAMES:
        return builtin_script(ref)
    path = Path(ref)
    if not path.is_file():
        raise UnknownScriptError(f"{str(ref)!r} is neither a built-in script nor a file")
    return parse_script(ScriptSource(path.read_text(), path.stem))
