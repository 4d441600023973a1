"""Planner, coders, critic and the refinement loop.

Every request's final user message starts with a stage marker
(``[plan]``, ``[code red]``, ``[code blue]``, ``[critique]``) followed by the
iteration number, so providers (and mocks) can tell the stages apart.
Plans and critiques are delimited by ``<red>...</red>`` and
``<blue>...</blue>``; coders may wrap their script in a fenced block.

Red is player 1 and blue is player 2.  The accepted script is the blue
(opponent-side) one.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..combat.scenario import ScenarioConfig
from ..combat.units import UnitTable
from ..env.core import CombatEnv, EnvConfig
from ..errors import SkirmishError
from ..harness.policies import ScriptPolicy
from ..script.mixture import MixturePolicy
from ..script.parser import DecisionTree, ScriptError, ScriptSource, parse_script
from .prompt import BLUE_TAG, RED_TAG, PromptBundle, build_env_prompt
from .provider import DecodingParams, Provider, ProviderError, ProviderRequest, ProviderResponse

SIDES = (RED_TAG, BLUE_TAG)
DEFAULT_REPAIR_ROUNDS = 3
DEFAULT_WINDOW = 3
DEFAULT_TOL = 0.05
SMOKE_EPISODES = 100
_FENCE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.S)


class ScriptFormatError(SkirmishError):
    """A response lacks the documented delimiters."""


class GenerationError(SkirmishError):
    """The coder could not produce a parseable script."""

    def __init__(self, side: str, rounds: int, last_error: ScriptError):
        super().__init__(f"{side} coder failed after {rounds} round(s): {last_error}")
        self.side = side
        self.rounds = rounds
        self.last_error = last_error


class RefinementError(SkirmishError):
    """A stage failed terminally; carries the loop state for diagnosis."""

    def __init__(self, stage: str, cause: Exception, state: "RefinementState"):
        super().__init__(f"refinement aborted in stage {stage!r} at iteration "
                         f"{state.iteration}: {cause}")
        self.stage = stage
        self.cause = cause
        self.state = state


# ---------------------------------------------------------------- transcript

class Transcript:
    """All prompts and responses, optionally mirrored to a JSON-lines file."""

    def __init__(self, path: str | Path | None = None):
        self.entries: list[dict] = []
        self.path = Path(path) if path is not None else None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("")

    def log(self, stage: str, iteration: int, side: str | None, request: ProviderRequest,
            response: ProviderResponse) -> None:
        entry = {"iteration": iteration, "stage": stage, "side": side,
                 "request": request.to_dict(), "response": response.to_dict()}
        self.entries.append(entry)
        if self.path is not None:
            with self.path.open("a") as fh:
                fh.write(json.dumps(entry) + "\n")


@dataclass
class _Call:
    provider: Provider
    decoding: DecodingParams = DecodingParams()
    transcript: Transcript | None = None
    retries: int = 0

    def ask(self, bundle: PromptBundle, stage: str, iteration: int, side: str | None) -> str:
        req = ProviderRequest(bundle, self.decoding)
        attempt = 0
        while True:
            try:
                resp = self.provider.complete(req)
                break
            except ProviderError as exc:
                if not exc.retriable or attempt >= self.retries:
                    raise
                attempt += 1
        if self.transcript is not None:
            self.transcript.log(stage, iteration, side, req, resp)
        return resp.text


def _call(provider, decoding=None, transcript=None, retries=0) -> _Call:
    return _Call(provider, decoding or DecodingParams(), transcript, retries)


# ---------------------------------------------------------------- parsing helpers

def extract_tagged(text: str) -> tuple[str, str]:
    """Return the stripped ``<red>`` and ``<blue>`` sections of *text*."""
    out = []
    for tag in SIDES:
        m = re.search(rf"<{tag}>(.*?)</{tag}>", text, re.S)
        if m is None or not m.group(1).strip():
            raise ScriptFormatError(f"response has no non-empty <{tag}>...</{tag}> section")
        out.append(m.group(1).strip())
    return out[0], out[1]


def extract_code(text: str) -> str:
    m = _FENCE.search(text)
    return (m.group(1) if m else text).strip() + "\n"


def tagged(red: str, blue: str) -> str:
    return f"<{RED_TAG}>\n{red}\n</{RED_TAG}>\n<{BLUE_TAG}>\n{blue}\n</{BLUE_TAG}>"


def _ask_tagged(call: _Call, bundle: PromptBundle, stage: str, iteration: int) -> tuple[str, str]:
    text = call.ask(bundle, stage, iteration, None)
    try:
        return extract_tagged(text)
    except ScriptFormatError as exc:
        retry = bundle.with_messages([*bundle.messages, ("assistant", text),
                                      ("user", f"[{stage}] iteration {iteration}\n{exc}. Answer again "
                                               f"using exactly the <{RED_TAG}> and <{BLUE_TAG}> "
                                               f"delimiters.")])
        return extract_tagged(call.ask(retry, stage, iteration, None))


# ---------------------------------------------------------------- stages

def plan_request(iteration: int, suggestions: tuple[str, str] | None = None) -> str:
    lines = [f"[plan] iteration {iteration}",
             "Plan a strategy for each team. Put the red plan between "
             f"<{RED_TAG}> and </{RED_TAG}> and the blue plan between <{BLUE_TAG}> and </{BLUE_TAG}>."]
    if suggestions is not None:
        lines += ["Critic suggestions from the previous simulation:", tagged(*suggestions)]
    return "\n".join(lines)


def plan_strategies(provider: Provider | _Call, prompt: PromptBundle, *, iteration: int = 1,
                    decoding: DecodingParams | None = None,
                    transcript: Transcript | None = None) -> tuple[str, str]:
    """Ask the planner for both sides' plans.

    If *prompt* does not already end with a user turn, the standard planning
    request is appended.  A response missing a delimiter is re-asked once.
    """
    call = provider if isinstance(provider, _Call) else _call(provider, decoding, transcript)
    msgs = list(prompt.messages)
    if not msgs or msgs[-1][0] != "user":
        msgs.append(("user", plan_request(iteration)))
    return _ask_tagged(call, prompt.with_messages(msgs), "plan", iteration)


def code_request(side: str, iteration: int, plan: str, suggestion: str | None = None) -> str:
    lines = [f"[code {side}] iteration {iteration}",
             f"Implement this strategy for the {side} team as one script. Reply with the script only.",
             "Strategy:", plan]
    if suggestion:
        lines += ["Critic suggestion:", suggestion]
    return "\n".join(lines)


def code_script(provider: Provider | _Call, plan: str, side: str, *,
                prompt: PromptBundle | None = None, iteration: int = 1,
                suggestion: str | None = None, rounds: int = DEFAULT_REPAIR_ROUNDS,
                history: list[tuple[str, str]] | None = None,
                decoding: DecodingParams | None = None,
                transcript: Transcript | None = None) -> ScriptSource:
    """Have the *side* coder implement *plan*; parse errors are fed back.

    *rounds* is the total number of coder attempts.  *history*, when given,
    is that coder's own conversation and is extended in place.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    if not plan.strip():
        raise ValueError("plan text is empty")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    call = provider if isinstance(provider, _Call) else _call(provider, decoding, transcript)
    system = prompt.system if prompt is not None else ""
    msgs = history if history is not None else []
    msgs.append(("user", code_request(side, iteration, plan, suggestion)))
    last: ScriptError | None = None
    for _ in range(rounds):
        text = call.ask(PromptBundle(system, tuple(msgs)), "code", iteration, side)
        msgs.append(("assistant", text))
        src = ScriptSource(extract_code(text), f"{side}_{iteration}")
        try:
            parse_script(src)
            return src
        except ScriptError as exc:
            last = exc
            msgs.append(("user", f"[code {side}] iteration {iteration}\nThe script does not parse: "
                                 f"{exc}. Reply with the corrected script only."))
    raise GenerationError(side, rounds, last)


@dataclass(frozen=True)
class SimulationReport:
    episodes: int
    p1_win_rate: float
    p2_win_rate: float
    draw_rate: float
    mean_steps: float
    mean_damage_p1: float  # hp + shield removed by player 1 per episode
    mean_damage_p2: float

    def to_text(self) -> str:
        return "\n".join([
            f"episodes: {self.episodes}",
            f"{RED_TAG} (player 1) win rate: {self.p1_win_rate:.4f}",
            f"{BLUE_TAG} (player 2) win rate: {self.p2_win_rate:.4f}",
            f"draw rate: {self.draw_rate:.4f}",
            f"mean episode length: {self.mean_steps:.1f} steps",
            f"mean damage dealt by {RED_TAG}: {self.mean_damage_p1:.1f}",
            f"mean damage dealt by {BLUE_TAG}: {self.mean_damage_p2:.1f}",
        ])


def simulate(red: DecisionTree, blue: DecisionTree, scenario: ScenarioConfig,
             episodes: int = 32, seed_base: int = 0) -> SimulationReport:
    """Script-vs-script rollouts through the self-play interface."""
    env = CombatEnv(EnvConfig(scenario, mode="self_play"))
    p1, p2 = ScriptPolicy(red), ScriptPolicy(blue)
    wins1 = wins2 = steps = 0
    dmg = {1: 0, 2: 0}
    for k in range(episodes):
        env.reset(seed_base + k)
        done = False
        info: dict = {}
        while not done:
            _, _, done, info = env.step_env(p1.act(env, 1), p2.act(env, 2))
            for ev in info["outcome"].damage_events:
                dmg[ev[0]] += ev[3] + ev[4]
        wins1 += info["won_p1"]
        wins2 += info["won_p2"]
        steps += env.state.step
    n = episodes
    return SimulationReport(n, wins1 / n, wins2 / n, (n - wins1 - wins2) / n, steps / n,
                            dmg[1] / n, dmg[2] / n)


def critique_request(iteration: int, report: SimulationReport, red: str | None = None,
                     blue: str | None = None) -> str:
    lines = [f"[critique] iteration {iteration}", "Simulation results:", report.to_text()]
    if red is not None and blue is not None:
        lines += [f"{RED_TAG} script:", red.rstrip(), f"{BLUE_TAG} script:", blue.rstrip()]
    lines.append(f"Suggest refinements for each side between <{RED_TAG}> and <{BLUE_TAG}> delimiters.")
    return "\n".join(lines)


def critique(provider: Provider | _Call, report: SimulationReport, *,
             prompt: PromptBundle | None = None, iteration: int = 1,
             red_script: str | None = None, blue_script: str | None = None,
             decoding: DecodingParams | None = None,
             transcript: Transcript | None = None) -> tuple[str, str]:
    call = provider if isinstance(provider, _Call) else _call(provider, decoding, transcript)
    system = prompt.system if prompt is not None else ""
    bundle = PromptBundle(system, (("user", critique_request(iteration, report, red_script,
                                                             blue_script)),))
    return _ask_tagged(call, bundle, "critique", iteration)


# ---------------------------------------------------------------- loop

def is_stable(values, window: int = DEFAULT_WINDOW, tol: float = DEFAULT_TOL) -> bool:
    """True iff the last *window* values span at most *tol*."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if len(values) < window:
        return False
    tail = list(values)[-window:]
    return max(tail) - min(tail) <= tol + 1e-12


@dataclass
class RefinementState:
    window: int = DEFAULT_WINDOW
    tol: float = DEFAULT_TOL
    iteration: int = 0
    red: ScriptSource | None = None
    blue: ScriptSource | None = None
    history: list[tuple[int, float, float]] = field(default_factory=list)

    def stable(self) -> bool:
        return (is_stable([h[1] for h in self.history], self.window, self.tol)
                and is_stable([h[2] for h in self.history], self.window, self.tol))


@dataclass
class RefinementResult:
    script: ScriptSource
    red: ScriptSource
    converged: bool
    state: RefinementState
    smoke: SimulationReport
    transcript: Transcript


def smoke_rollout(red: DecisionTree, blue: DecisionTree, scenario: ScenarioConfig,
                  episodes: int = SMOKE_EPISODES, seed_base: int = 0) -> SimulationReport:
    """Run *blue* as the scripted opponent (decision-tree mode) against *red*."""
    env = CombatEnv(EnvConfig(scenario, opponent_mixture=MixturePolicy.uniform([blue])))
    policy = ScriptPolicy(red)
    wins1 = wins2 = steps = 0
    dmg = {1: 0, 2: 0}
    for k in range(episodes):
        env.reset(seed_base + k)
        done = False
        info: dict = {}
        while not done:
            _, done, info = env.step_env(policy.act(env, 1))
            for ev in info["outcome"].damage_events:
                dmg[ev[0]] += ev[3] + ev[4]
        wins1 += info["won_p1"]
        wins2 += info["won_p2"]
        steps += env.state.step
    n = episodes
    return SimulationReport(n, wins1 / n, wins2 / n, (n - wins1 - wins2) / n, steps / n,
                            dmg[1] / n, dmg[2] / n)


def refine_loop(provider: Provider, scenario: ScenarioConfig, max_iters: int = 10,
                stability_window: int = DEFAULT_WINDOW, stability_tol: float = DEFAULT_TOL, *,
                episodes: int = 32, rounds: int = DEFAULT_REPAIR_ROUNDS,
                unit_table: UnitTable | None = None, decoding: DecodingParams | None = None,
                transcript_path: str | Path | None = None, retries: int = 2,
                seed_base: int = 0, smoke_episodes: int = SMOKE_EPISODES) -> RefinementResult:
    """Plan, code, simulate and critique until both win rates stabilize."""
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    transcript = Transcript(transcript_path)
    call = _call(provider, decoding, transcript, retries)
    base = build_env_prompt(scenario, unit_table)
    state = RefinementState(stability_window, stability_tol)
    planner: list[tuple[str, str]] = []
    coders: dict[str, list[tuple[str, str]]] = {s: [] for s in SIDES}
    suggestions: tuple[str, str] | None = None
    converged = False

    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except (SkirmishError, ValueError) as exc:
            raise RefinementError(name, exc, state) from exc

    for it in range(1, max_iters + 1):
        state.iteration = it
        planner.append(("user", plan_request(it, suggestions)))
        plans = stage("plan", plan_strategies, call, base.with_messages(planner), iteration=it)
        planner.append(("assistant", tagged(*plans)))
        srcs = {}
        for i, side in enumerate(SIDES):
            sug = suggestions[i] if suggestions is not None else None
            srcs[side] = stage("code", code_script, call, plans[i], side, prompt=base,
                               iteration=it, suggestion=sug, rounds=rounds, history=coders[side])
        state.red, state.blue = srcs[RED_TAG], srcs[BLUE_TAG]
        red_tree, blue_tree = parse_script(state.red), parse_script(state.blue)
        report = stage("simulate", simulate, red_tree, blue_tree, scenario, episodes, seed_base)
        state.history.append((it, report.p1_win_rate, report.p2_win_rate))
        if state.stable():
            converged = True
            break
        if it == max_iters:
            break
        suggestions = stage("critique", critique, call, report, prompt=base, iteration=it,
                            red_script=state.red.text, blue_script=state.blue.text)

    blue_tree = stage("accept", parse_script, state.blue)
    smoke = stage("smoke", smoke_rollout, parse_script(state.red), blue_tree, scenario,
                  smoke_episodes, seed_base)
    return RefinementResult(state.blue, state.red, converged, state, smoke, transcript)
