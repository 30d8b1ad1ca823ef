"""Empirical Rademacher complexity and the aggregate capacity metric.

A single draw correlates the class's best achievable labeling against
random signs on a random subsample; capacity averages that correlation
over subsample sizes drawn uniformly from 1..n.  Outputs are mapped to
{-1, +1}, so a class that shatters every draw has capacity exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataspace import Dataset
from .hypotheses import HypothesisClass, TrainSpec, train

__all__ = ["RademacherDraw", "CapacityEstimate", "rademacher_draw", "capacity"]


@dataclass(frozen=True)
class RademacherDraw:
    """One (D, sigma) draw and the best correlation found for it."""

    D: tuple[int, ...]
    sigma: tuple[int, ...]
    achieved: float

    def __post_init__(self):
        if not -1.0 - 1e-12 <= self.achieved <= 1.0 + 1e-12:
            raise ValueError("achieved correlation outside [-1, 1]")


@dataclass(frozen=True)
class CapacityEstimate:
    mean: float
    stderr: float
    draws: int
    per_m: dict[int, float]

    def __post_init__(self):
        if self.draws < 1 or self.stderr < 0:
            raise ValueError("draws must be >= 1 and stderr nonnegative")


def rademacher_draw(cls: HypothesisClass, dataset: Dataset, m: int, seed: int,
                    restarts: int = 3) -> RademacherDraw:
    """Best sign correlation the class can realize on one random draw.

    Samples D of size m without replacement and signs sigma uniformly,
    then evaluates sup over the class of (1/m) sum sigma_i * (2 h(x_i) - 1):
    exactly for the enumerable kinds, and by best-of-``restarts`` fits to
    targets (sigma + 1) / 2 for trained families (a lower bound on the sup).
    """
    if not 1 <= m <= dataset.n:
        raise ValueError("draw size m must lie in [1, n]")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    D = rng.choice(dataset.n, size=m, replace=False)
    sigma = rng.integers(0, 2, size=m) * 2 - 1
    if cls.kind == "Exhaustive":
        achieved = 1.0
    elif cls.kind == "Dictionary":
        # Optimal member stores ones exactly on positive-sign points, up
        # to the memory limit; each unstorable positive costs 2/m.
        positives = int((sigma == 1).sum())
        achieved = 1.0 - 2.0 * max(positives - cls.memory, 0) / m
    else:
        targets = np.zeros(dataset.n, dtype=np.int8)
        targets[D] = ((sigma + 1) // 2).astype(np.int8)
        achieved = -np.inf
        for r in range(restarts):
            h = train(cls, dataset, TrainSpec(targets=targets, train_mask=D, seed=r))
            corr = float(np.mean(sigma * (2 * h[D].astype(int) - 1)))
            achieved = max(achieved, corr)
    return RademacherDraw(tuple(int(i) for i in D), tuple(int(s) for s in sigma),
                          float(achieved))


def capacity(cls: HypothesisClass, dataset: Dataset, n_draws: int,
             restarts: int = 3, seed: int = 0) -> CapacityEstimate:
    """Average draw correlation with m uniform on 1..n.

    Per-draw randomness comes from a seed derived from (seed, draw
    index), so draws can be evaluated in any order or in parallel
    without changing the estimate.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    values = np.empty(n_draws)
    by_m: dict[int, list[float]] = {}
    for i in range(n_draws):
        drng = np.random.default_rng((seed, i))
        m = int(drng.integers(1, dataset.n + 1))
        draw_seed = int(drng.integers(0, 2 ** 63))
        draw = rademacher_draw(cls, dataset, m, draw_seed, restarts)
        values[i] = draw.achieved
        by_m.setdefault(m, []).append(draw.achieved)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(n_draws)) if n_draws > 1 else 0.0
    per_m = {m: float(np.mean(v)) for m, v in sorted(by_m.items())}
    return CapacityEstimate(mean, stderr, n_draws, per_m)
