"""Lexer, recursive-descent parser and pretty-printer for decision-tree scripts.

A script is an ordered list of ``when <condition>: <action>`` rules followed
by a mandatory ``fallback: <action>``.  Statements are separated by newlines
or ``;``; ``#`` starts a comment.  The language has no arithmetic, variables
or loops, so every parsed tree is total by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterator, NamedTuple, Union

from ..errors import SkirmishError

QUANTITIES = (
    "distance_to_nearest_enemy",
    "hp_fraction",
    "shield_fraction",
    "enemies_in_range",
    "step_count",
)
FLAGS = ("cooldown_ready",)
ACTIONS = (
    "attack_nearest",
    "attack_weakest",
    "attack_highest_hate",
    "attack_focus",
    "move_toward_enemy_spawn",
    "move_toward_own_spawn",
    "move_away_from_nearest_enemy",
    "hold",
)
COMPARATORS = ("<", "<=", ">", ">=", "==", "!=")
KEYWORDS = ("when", "fallback", "and", "or", "not")


class ScriptError(SkirmishError):
    """Base for script errors; carries a 1-based source location."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.detail = message
        self.line = line
        self.column = column


class ScriptSyntaxError(ScriptError):
    pass


class UnknownNameError(ScriptSyntaxError):
    pass


class MissingFallbackError(ScriptSyntaxError):
    pass


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Compare:
    quantity: str
    op: str
    value: Fraction
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Flag:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "Condition"


@dataclass(frozen=True)
class And:
    operands: tuple["Condition", ...]


@dataclass(frozen=True)
class Or:
    operands: tuple["Condition", ...]


Condition = Union[Compare, Flag, Not, And, Or]


@dataclass(frozen=True)
class Rule:
    condition: Condition
    action: str


@dataclass(frozen=True)
class DecisionTree:
    rules: tuple[Rule, ...]
    fallback: str
    name: str = field(default="", compare=False)

    def __str__(self) -> str:
        return format_script(self)


@dataclass(frozen=True)
class ScriptSource:
    text: str
    name: str = ""


# ---------------------------------------------------------------- lexer

class Token(NamedTuple):
    kind: str  # ident, number, op, colon, semi, lparen, rparen, newline, eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> Iterator[Token]:
    line, col, i, depth = 1, 1, 0, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        if ch == "\n":
            if depth == 0:
                yield Token("newline", "\n", line, col)
            i += 1
            line, col = line + 1, 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_col = col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            yield Token("ident", text[i:j], line, start_col)
        elif ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                if j >= n or not text[j].isdigit():
                    raise ScriptSyntaxError("malformed number", line, start_col)
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and (text[j].isalpha() or text[j] == "_"):
                raise ScriptSyntaxError("malformed number", line, start_col)
            yield Token("number", text[i:j], line, start_col)
        elif text.startswith(("<=", ">=", "==", "!="), i):
            j = i + 2
            yield Token("op", text[i:j], line, start_col)
        elif ch in "<>":
            j = i + 1
            yield Token("op", ch, line, start_col)
        elif ch in ":;()":
            j = i + 1
            kind = {":": "colon", ";": "semi", "(": "lparen", ")": "rparen"}[ch]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth = max(depth - 1, 0)
            yield Token(kind, ch, line, start_col)
        else:
            raise ScriptSyntaxError(f"unexpected character {ch!r}", line, start_col)
        col += j - i
        i = j
    yield Token("eof", "", line, col)


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.tokens = list(tokenize(text))
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None, cls=ScriptSyntaxError):
        t = tok or self.tok
        return cls(message, t.line, t.column)

    @staticmethod
    def describe(t: Token) -> str:
        return {"eof": "end of script", "newline": "end of line"}.get(t.kind, repr(t.text))

    def expect(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {what}, found {self.describe(self.tok)}")
        return self.advance()

    def skip_separators(self) -> bool:
        seen = False
        while self.tok.kind in ("newline", "semi"):
            self.advance()
            seen = True
        return seen

    def program(self) -> tuple[list[Rule], str]:
        rules: list[Rule] = []
        self.skip_separators()
        while True:
            t = self.tok
            if t.kind == "eof":
                raise self.error("script has no fallback rule", t, MissingFallbackError)
            if t.kind == "ident" and t.text == "when":
                self.advance()
                cond = self.condition()
                self.expect("colon", "':' after condition")
                rules.append(Rule(cond, self.action()))
            elif t.kind == "ident" and t.text == "fallback":
                self.advance()
                self.expect("colon", "':' after 'fallback'")
                fallback = self.action()
                self.end_of_statement()
                self.skip_separators()
                if self.tok.kind != "eof":
                    raise self.error("nothing may follow the fallback rule")
                return rules, fallback
            else:
                raise self.error(f"expected 'when' or 'fallback', found {self.describe(t)}")
            self.end_of_statement()
            self.skip_separators()

    def end_of_statement(self) -> None:
        if self.tok.kind not in ("newline", "semi", "eof"):
            raise self.error(f"expected end of rule, found {self.describe(self.tok)}")

    def action(self) -> str:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected an action, found {self.describe(t)}")
        if t.text not in ACTIONS:
            raise self.error(f"unknown action {t.text!r}", t, UnknownNameError)
        self.advance()
        return t.text

    def condition(self) -> Condition:
        parts = [self.conjunction()]
        while self.tok.kind == "ident" and self.tok.text == "or":
            self.advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Condition:
        parts = [self.negation()]
        while self.tok.kind == "ident" and self.tok.text == "and":
            self.advance()
            parts.append(self.negation())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def negation(self) -> Condition:
        if self.tok.kind == "ident" and self.tok.text == "not":
            self.advance()
            return Not(self.negation())
        return self.atom()

    def atom(self) -> Condition:
        t = self.tok
        if t.kind == "lparen":
            self.advance()
            inner = self.condition()
            self.expect("rparen", "')'")
            return inner
        if t.kind != "ident":
            raise self.error(f"expected a condition, found {self.describe(t)}")
        if t.text in FLAGS:
            self.advance()
            return Flag(t.text)
        if t.text in QUANTITIES:
            self.advance()
            op = self.expect("op", "a comparator").text
            num = self.expect("number", "a number")
            return Compare(t.text, op, Fraction(num.text), num.text)
        if t.text in KEYWORDS:
            raise self.error(f"expected a condition, found keyword {t.text!r}")
        raise self.error(f"unknown predicate {t.text!r}", t, UnknownNameError)


def parse_script(source: ScriptSource | str, name: str | None = None) -> DecisionTree:
    """Parse script text into a :class:`DecisionTree`.

    Raises :class:`ScriptSyntaxError` (or its subclasses
    :class:`UnknownNameError`, :class:`MissingFallbackError`) with a 1-based
    line/column.
    """
    if isinstance(source, ScriptSource):
        text, label = source.text, source.name
    else:
        text, label = source, ""
    rules, fallback = _Parser(text).program()
    return DecisionTree(tuple(rules), fallback, name if name is not None else label)


# ---------------------------------------------------------------- printer

def format_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    d = Decimal(value.numerator) / Decimal(value.denominator)
    return format(d.normalize(), "f")


def format_condition(cond: Condition, parent: str = "") -> str:
    if isinstance(cond, Compare):
        return f"{cond.quantity} {cond.op} {format_number(cond.value)}"
    if isinstance(cond, Flag):
        return cond.name
    if isinstance(cond, Not):
        return f"not {format_condition(cond.operand, 'not')}"
    if isinstance(cond, And):
        body = " and ".join(format_condition(c, "and") for c in cond.operands)
        return f"({body})" if parent == "not" else body
    body = " or ".join(format_condition(c, "or") for c in cond.operands)
    return f"({body})" if parent in ("and", "not") else body


def format_script(tree: DecisionTree) -> str:
    lines = [f"when {format_condition(r.condition)}: {r.action}" for r in tree.rules]
    lines.append(f"fallback: {tree.fallback}")
    return "\n".join(lines) + "\n"
