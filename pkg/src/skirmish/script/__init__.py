"""Opponent decision-tree scripting language."""

from .interpreter import evaluate_script, script_codes
from .library import BUILTIN_NAMES, UnknownScriptError, builtin_script, builtin_scripts, load_script
from .mixture import MixturePolicy, select_index, select_strategy
from .parser import (
    ACTIONS, FLAGS, QUANTITIES, And, Compare, DecisionTree, Flag, MissingFallbackError, Not, Or,
    Rule, ScriptError, ScriptSource, ScriptSyntaxError, UnknownNameError, format_script,
    parse_script,
)

__all__ = [
    "evaluate_script", "script_codes", "BUILTIN_NAMES", "UnknownScriptError", "builtin_script",
    "builtin_scripts", "load_script", "MixturePolicy", "select_index", "select_strategy",
    "ACTIONS", "FLAGS", "QUANTITIES", "And", "Compare", "DecisionTree", "Flag",
    "MissingFallbackError", "Not", "Or", "Rule", "ScriptError", "ScriptSource",
    "ScriptSyntaxError", "UnknownNameError", "format_script", "parse_script",
]
