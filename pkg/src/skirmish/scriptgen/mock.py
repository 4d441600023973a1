"""Deterministic canned responder used by tests and ``--provider mock``."""

from __future__ import annotations

from .provider import MockProvider, ProviderRequest

RED_SCRIPT = """\
# Shoot when ready and in range, otherwise step back.
when cooldown_ready and enemies_in_range >= 1: attack_nearest
fallback: move_away_from_nearest_enemy
"""

BLUE_SCRIPT = """\
# Everyone hits the lowest-id enemy.
fallback: attack_focus
"""


def last_user(request: ProviderRequest) -> str:
    for role, text in reversed(request.prompt.messages):
        if role == "user":
            return text
    return ""


def canned_response(request: ProviderRequest) -> str:
    """Fixed plans, scripts and critiques keyed on the stage marker."""
    msg = last_user(request)
    if msg.startswith("[plan]"):
        return ("<red>Kite: fire when the weapon is ready, otherwise back away.</red>\n"
                "<blue>Focus every unit on the lowest-id enemy.</blue>")
    if msg.startswith("[code red]"):
        return f"```dsl\n{RED_SCRIPT}```"
    if msg.startswith("[code blue]"):
        return f"```dsl\n{BLUE_SCRIPT}```"
    if msg.startswith("[critique]"):
        return ("<red>Keep spacing so only one unit is threatened at a time.</red>\n"
                "<blue>Chase the unit that is already damaged.</blue>")
    return ""


def mock_provider() -> MockProvider:
    return MockProvider(canned_response)
