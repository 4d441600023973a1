"""Tabular multi-agent value learner (independent TD with optional VDN sum)."""

from .features import FeatureBins, Featurizer, featurize, pack, unpack
from .qlearning import QTable, Transition, epsilon_greedy, td_update, vdn_joint_value, vdn_update
from .train import (
    MAX_FEATURES, LearnerConfig, LearningCurve, QModel, TrainResult, evaluate, greedy_actions,
    load_model, train,
)

__all__ = [
    "FeatureBins", "Featurizer", "featurize", "pack", "unpack", "QTable", "Transition",
    "epsilon_greedy", "td_update", "vdn_joint_value", "vdn_update", "MAX_FEATURES",
    "LearnerConfig", "LearningCurve", "QModel", "TrainResult", "evaluate", "greedy_actions",
    "load_model", "train",
]
