"""Small numeric helpers shared by the learner and the evaluation harness."""

from __future__ import annotations

from typing import Iterable, Sequence

DEFAULT_SMOOTHING = 0.6


def smooth(series: Iterable[float], factor: float = DEFAULT_SMOOTHING) -> list[float]:
    """Exponential smoothing: ``s0 = x0``, ``s_t = factor*s_{t-1} + (1-factor)*x_t``."""
    if not 0.0 <= factor < 1.0:
        raise ValueError("smoothing factor must lie in [0, 1)")
    out: list[float] = []
    for x in series:
        out.append(float(x) if not out else factor * out[-1] + (1.0 - factor) * float(x))
    return out


def mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def variance(values: Sequence[float]) -> float:
    """Population variance (divides by n)."""
    if not values:
        return 0.0
    m = mean(values)
    return sum((v - m) ** 2 for v in values) / len(values)
