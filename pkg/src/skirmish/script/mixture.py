"""Weighted mixtures of opponent scripts and inverse-CDF selection."""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ConfigurationError
from .parser import DecisionTree

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class MixturePolicy:
    entries: tuple[tuple[DecisionTree, float], ...]
    resample_per_step: bool = False

    def __post_init__(self):
        if not self.entries:
            raise ConfigurationError("mixture needs at least one script")
        ws = [w for _, w in self.entries]
        if any(w < 0 for w in ws):
            raise ConfigurationError("mixture weights must be non-negative")
        if abs(sum(ws) - 1.0) > WEIGHT_TOL:
            raise ConfigurationError(f"mixture weights sum to {sum(ws)!r}, not 1")

    @classmethod
    def uniform(cls, trees: Sequence[DecisionTree], resample_per_step: bool = False) -> "MixturePolicy":
        """Equal weights, the default opponent configuration."""
        k = len(trees)
        if k == 0:
            raise ConfigurationError("mixture needs at least one script")
        return cls(tuple((t, 1.0 / k) for t in trees), resample_per_step)

    @classmethod
    def weighted(cls, trees: Sequence[DecisionTree], weights: Sequence[float] | None = None,
                 resample_per_step: bool = False) -> "MixturePolicy":
        if weights is None:
            return cls.uniform(trees, resample_per_step)
        if len(weights) != len(trees):
            raise ConfigurationError("one weight per script required")
        return cls(tuple(zip(trees, (float(w) for w in weights))), resample_per_step)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.entries)

    @property
    def trees(self) -> tuple[DecisionTree, ...]:
        return tuple(t for t, _ in self.entries)


def select_index(weights: Sequence[float], u: float) -> int:
    """Inverse CDF: smallest i with ``u < w_0 + ... + w_i``.

    ``u`` beyond the last cumulative weight (rounding) maps to the last
    positive-weight entry.
    """
    cdf = list(itertools.accumulate(weights))
    i = bisect.bisect_right(cdf, u)
    if i >= len(weights):
        i = max(j for j, w in enumerate(weights) if w > 0)
    return i


def select_strategy(mixture: MixturePolicy, rng: np.random.Generator) -> int:
    """Draw one script index using a single uniform variate from *rng*."""
    return select_index(mixture.weights, float(rng.random()))
