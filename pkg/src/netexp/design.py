"""Randomized treatment assignment policies.

Draws are counter-based: the rng is keyed by (seed, trial) so trial t's
vector does not depend on how many draws preceded it, which keeps parallel
trials reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DesignError(ValueError):
    pass


@dataclass(frozen=True)
class TreatmentDraw:
    z: np.ndarray
    p: float
    kind: str  # "unit" | "cluster"
    z_cluster: np.ndarray | None = None
    partition: object | None = None


def _rng(seed, trial):
    if trial is None:
        return np.random.default_rng(seed)
    return np.random.default_rng([int(seed), int(trial)])


def validate_probability(p, allow_degenerate=False):
    if allow_degenerate:
        if not (0.0 <= p <= 1.0):
            raise DesignError("treatment probability must lie in [0, 1]")
    elif not (0.0 < p < 1.0):
        raise DesignError("treatment probability must lie in (0, 1)")


def draw_unit_bernoulli(n, p, seed, trial=None):
    """iid Bernoulli(p) bits per node."""
    validate_probability(p, allow_degenerate=True)
    z = (_rng(seed, trial).random(n) < p).astype(np.int8)
    return TreatmentDraw(z=z, p=float(p), kind="unit")


def draw_cluster_bernoulli(partition, p, seed, trial=None):
    """One Bernoulli(p) bit per cluster, broadcast to cluster members."""
    validate_probability(p, allow_degenerate=True)
    zc = (_rng(seed, trial).random(partition.num_clusters) < p).astype(np.int8)
    return TreatmentDraw(z=zc[partition.assignment], p=float(p), kind="cluster",
                         z_cluster=zc, partition=partition)
