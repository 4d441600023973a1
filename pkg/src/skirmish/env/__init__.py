"""Multi-agent environment facade: observations, masks, rewards, two-sided control."""

from .core import DEFAULT_OPPONENTS, MODES, CombatEnv, EnvConfig, EpisodeInfo, default_mixture, make_env
from .encoding import Encoder, ego_to_world_code
from .reward import (
    DamageCredit, RewardComponents, RewardConstants, compute_reward, default_constants,
    reward_components,
)

__all__ = [
    "DEFAULT_OPPONENTS", "MODES", "CombatEnv", "EnvConfig", "EpisodeInfo", "default_mixture",
    "make_env", "Encoder", "ego_to_world_code", "DamageCredit", "RewardComponents",
    "RewardConstants", "compute_reward", "default_constants", "reward_components",
]
