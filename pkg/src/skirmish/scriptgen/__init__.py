"""LLM-assisted opponent script authoring: planner, coders, critic."""

from .loop import (
    DEFAULT_REPAIR_ROUNDS, DEFAULT_TOL, DEFAULT_WINDOW, SMOKE_EPISODES, GenerationError,
    RefinementError, RefinementResult, RefinementState, ScriptFormatError, SimulationReport,
    Transcript, code_script, critique, extract_code, extract_tagged, is_stable, plan_strategies,
    refine_loop, simulate, smoke_rollout,
)
from .mock import canned_response, mock_provider
from .prompt import PromptBundle, build_env_prompt, grammar_text
from .provider import (
    DecodingParams, HTTPProvider, MockProvider, Provider, ProviderError, ProviderRequest,
    ProviderResponse,
)

__all__ = [
    "DEFAULT_REPAIR_ROUNDS", "DEFAULT_TOL", "DEFAULT_WINDOW", "SMOKE_EPISODES",
    "GenerationError", "RefinementError", "RefinementResult", "RefinementState",
    "ScriptFormatError", "SimulationReport", "Transcript", "code_script", "critique",
    "extract_code", "extract_tagged", "is_stable", "plan_strategies", "refine_loop", "simulate",
    "smoke_rollout", "canned_response", "mock_provider", "PromptBundle", "build_env_prompt",
    "grammar_text", "DecodingParams", "HTTPProvider", "MockProvider", "Provider",
    "ProviderError", "ProviderRequest", "ProviderResponse",
]
