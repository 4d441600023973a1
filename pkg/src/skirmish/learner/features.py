"""Coarse discretization of observation vectors into table indices.

Each living agent's observation maps to a bucket tuple

    (distance to nearest visible enemy, own hp, cooldown ready,
     bearing to that enemy, some ally is nearer to that enemy,
     own hp + shield fraction is below every visible ally's)

which is packed injectively into an integer.  Index 0 is reserved for the
all-zero observation of a dead agent.  With no enemy visible the distance
bucket is the extra "none" bucket and bearing/ally buckets are 0.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from math import atan2, floor, pi

import numpy as np

from ..env.encoding import OWN_FEATURES

_OWN = len(OWN_FEATURES)


@dataclass(frozen=True)
class FeatureBins:
    #: upper bounds (fractions of sight range) of the distance buckets; a
    #: distance equal to an edge falls in the bucket above it
    distance_edges: tuple[float, ...] = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    hp_buckets: int = 4
    bearing_sectors: int = 8
    weakest_flag: bool = True

    def __post_init__(self):
        e = self.distance_edges
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("distance_edges must be strictly increasing")
        if self.hp_buckets < 1 or self.bearing_sectors < 1:
            raise ValueError("bucket counts must be positive")

    @property
    def distance_buckets(self) -> int:
        """Visible-distance buckets plus one for "no enemy visible"."""
        return len(self.distance_edges) + 2

    @property
    def size(self) -> int:
        """Number of feature indices, including the reserved dead index."""
        return 1 + self.distance_buckets * self.hp_buckets * 2 * self.bearing_sectors * 4

    def to_dict(self) -> dict:
        return {"distance_edges": list(self.distance_edges), "hp_buckets": self.hp_buckets,
                "bearing_sectors": self.bearing_sectors, "weakest_flag": self.weakest_flag}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureBins":
        return cls(tuple(float(v) for v in d["distance_edges"]), int(d["hp_buckets"]),
                   int(d["bearing_sectors"]), bool(d.get("weakest_flag", True)))


def pack(bins: FeatureBins, dist: int, hp: int, ready: int, bearing: int, ally: int,
         weakest: int) -> int:
    return 1 + ((((dist * bins.hp_buckets + hp) * 2 + ready) * bins.bearing_sectors
                 + bearing) * 2 + ally) * 2 + weakest


def unpack(bins: FeatureBins, index: int) -> tuple[int, int, int, int, int, int] | None:
    if index == 0:
        return None
    i = index - 1
    i, weakest = divmod(i, 2)
    i, ally = divmod(i, 2)
    i, bearing = divmod(i, bins.bearing_sectors)
    i, ready = divmod(i, 2)
    dist, hp = divmod(i, bins.hp_buckets)
    return dist, hp, ready, bearing, ally, weakest


def featurize(observation, bins: FeatureBins, n_enemies: int, n_allies: int, block: int) -> int:
    """Table index of one agent's observation vector (see :class:`Featurizer`)."""
    return Featurizer(bins, n_enemies, n_allies, block)(observation)


class Featurizer:
    """Featurize observations of a fixed layout (block width and slot counts)."""

    def __init__(self, bins: FeatureBins, n_enemies: int, n_allies: int, block: int):
        self.bins = bins
        self.n_enemies = n_enemies
        self.n_allies = n_allies
        self.block = block

    @classmethod
    def for_env(cls, env, bins: FeatureBins, player: int = 1) -> "Featurizer":
        r = env.roster
        other = 2 if player == 1 else 1
        return cls(bins, r.count(other), r.count(player) - 1, env.encoder.block)

    def __call__(self, observation) -> int:
        obs = observation.tolist() if isinstance(observation, np.ndarray) else list(observation)
        bins = self.bins
        if obs[0] <= 0.0:  # only a dead agent has zero own hp
            return 0
        hp = min(int(obs[0] * bins.hp_buckets), bins.hp_buckets - 1)
        ready = 1 if obs[2] > 0.5 else 0
        b = self.block
        best = -1
        best_d = 2.0
        for j in range(self.n_enemies):
            at = _OWN + j * b
            if obs[at] > 0.5 and obs[at + 3] < best_d:
                best, best_d = at, obs[at + 3]
        base = _OWN + self.n_enemies * b
        own_pool = obs[0] + obs[1]
        weakest = 0
        allies = []
        for k in range(self.n_allies):
            at = base + k * b
            if obs[at] > 0.5:
                allies.append(at)
        if bins.weakest_flag and allies and all(own_pool < obs[at + 4] + obs[at + 5] for at in allies):
            weakest = 1
        if best < 0:
            return pack(bins, bins.distance_buckets - 1, hp, ready, 0, 0, weakest)
        dist = bisect.bisect_right(bins.distance_edges, best_d)
        ex, ey = obs[best + 1], obs[best + 2]
        sectors = bins.bearing_sectors
        angle = atan2(ey, ex)
        bearing = int(floor((angle + pi / sectors) / (2 * pi / sectors))) % sectors
        # does some visible ally stand closer to that enemy than we do?
        ally = 0
        d2 = ex * ex + ey * ey
        for at in allies:
            ax = ex - obs[at + 1]
            ay = ey - obs[at + 2]
            if ax * ax + ay * ay < d2:
                ally = 1
                break
        return pack(bins, dist, hp, ready, bearing, ally, weakest)
