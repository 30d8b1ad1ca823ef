"""Hypothesis classes: exhaustive, dictionary and trained families.

A hypothesis instance is always realized as a full labeling of the
input space (one bit per point id).  Classes come in three kinds:

* ``Exhaustive`` -- every labeling of the space;
* ``Dictionary`` -- labelings with at most ``m`` ones (stored entries
  default to 0 elsewhere);
* ``Trained`` -- one of four model families fitted by the in-house
  weighted trainers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .dataspace import Dataset
from .trainers import FAMILY_KINDS, TrainerError, fit_predict

__all__ = [
    "Labeling",
    "HypothesisClass",
    "ModelFamily",
    "TrainSpec",
    "EnumerationCapError",
    "exhaustive",
    "dictionary",
    "trained",
    "train",
    "enumerate_consistent",
    "is_member",
    "default_grid",
    "pack_labeling",
    "unpack_labeling",
]

Labeling = np.ndarray  # length-n int8 vector over {0, 1}

DEFAULT_ENUM_CAP = 2 ** 24


class EnumerationCapError(RuntimeError):
    def __init__(self, required: int, cap: int):
        super().__init__(f"enumeration needs {required} candidates, cap is {cap}")
        self.required = required
        self.cap = cap


@dataclass(frozen=True)
class HypothesisClass:
    """One auditable class: kind plus its defining parameters."""

    kind: str  # "Exhaustive" | "Dictionary" | "Trained"
    memory: Optional[int] = None
    family_kind: Optional[str] = None
    hyperparameters: Optional[tuple] = None  # sorted (key, value) pairs

    def __post_init__(self):
        if self.kind == "Dictionary":
            if self.memory is None or self.memory < 0:
                raise ValueError("Dictionary needs memory m >= 0")
        elif self.kind == "Trained":
            if self.family_kind not in FAMILY_KINDS:
                raise ValueError(f"unknown family kind {self.family_kind!r}")
        elif self.kind != "Exhaustive":
            raise ValueError(f"unknown class kind {self.kind!r}")

    @property
    def params(self) -> dict:
        return dict(self.hyperparameters or ())

    def class_id(self) -> str:
        if self.kind == "Exhaustive":
            return "exhaustive"
        if self.kind == "Dictionary":
            return f"dict_m{self.memory}"
        items = ",".join(f"{k}={v}" for k, v in self.hyperparameters or ())
        return f"{self.family_kind}({items})"


def exhaustive() -> HypothesisClass:
    return HypothesisClass("Exhaustive")


def dictionary(m: int) -> HypothesisClass:
    return HypothesisClass("Dictionary", memory=m)


def trained(family_kind: str, **params) -> HypothesisClass:
    return HypothesisClass("Trained", family_kind=family_kind,
                           hyperparameters=tuple(sorted(params.items())))


@dataclass(frozen=True)
class ModelFamily:
    """A family of hypothesis classes sharing one trainer."""

    family_kind: str
    grid: tuple[HypothesisClass, ...]

    def __post_init__(self):
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if len({c.hyperparameters for c in self.grid}) != len(self.grid):
            raise ValueError("duplicate hyperparameter maps in grid")


@dataclass(frozen=True)
class TrainSpec:
    """Targets, weights, mask and seed for one weighted fit."""

    targets: np.ndarray
    weights: Optional[np.ndarray] = None
    train_mask: Optional[np.ndarray] = None  # point ids used for fitting
    seed: int = 0


def train(cls: HypothesisClass, dataset: Dataset, spec: TrainSpec) -> Labeling:
    """Fit a trained-class member and label the whole space.

    Deterministic given (class, dataset, spec); the seed only perturbs
    tie-breaking via a tiny weight jitter, used by restart searches.
    """
    if cls.kind != "Trained":
        raise TrainerError("train requires a Trained class")
    mask = np.arange(dataset.n) if spec.train_mask is None else np.asarray(spec.train_mask, dtype=int)
    targets = np.asarray(spec.targets, dtype=np.int8)
    w = np.ones(dataset.n) if spec.weights is None else np.asarray(spec.weights, dtype=float)
    if spec.seed:
        jitter = np.random.default_rng(spec.seed).uniform(0.0, 1e-9, dataset.n)
        w = w * (1.0 + jitter)
    pred = fit_predict(cls.family_kind, cls.params,
                       dataset.features[mask], targets[mask], w[mask],
                       dataset.features)
    return np.asarray(pred, dtype=np.int8)


def is_member(cls: HypothesisClass, h: Labeling) -> bool:
    if cls.kind == "Exhaustive":
        return True
    if cls.kind == "Dictionary":
        return int(np.sum(np.asarray(h) == 1)) <= cls.memory
    raise ValueError("membership undecidable for Trained classes; use train-based search")


def enumerate_consistent(cls: HypothesisClass, h_star: Labeling, audit: Sequence[int],
                         dataset: Dataset, cap: int = DEFAULT_ENUM_CAP) -> Iterator[Labeling]:
    """Yield every class member agreeing with ``h_star`` on the audit set."""
    h_star = np.asarray(h_star, dtype=np.int8)
    queried = np.zeros(dataset.n, dtype=bool)
    queried[list(audit)] = True
    free = np.flatnonzero(~queried)
    if cls.kind == "Exhaustive":
        required = 2 ** len(free)
        if required > cap:
            raise EnumerationCapError(required, cap)
        for bits in itertools.product((0, 1), repeat=len(free)):
            h = h_star.copy()
            h[free] = bits
            yield h
        return
    if cls.kind != "Dictionary":
        raise ValueError("enumeration requires an Exhaustive or Dictionary class")
    if not is_member(cls, h_star):
        raise ValueError("platform model outside declared class")
    ones_on_s = int(np.sum(h_star[queried] == 1))
    m_free = cls.memory - ones_on_s
    required = sum(_ncomb(len(free), k) for k in range(min(m_free, len(free)) + 1))
    if required > cap:
        raise EnumerationCapError(required, cap)
    base = h_star.copy()
    base[free] = 0
    for k in range(min(m_free, len(free)) + 1):
        for ones in itertools.combinations(free, k):
            h = base.copy()
            h[list(ones)] = 1
            yield h


def _ncomb(n: int, k: int) -> int:
    import math
    return math.comb(n, k)


# ------------------------------------------------------- default grids

_DEFAULT_GRIDS = {
    "linear": {"penalty": [None, "l2"],
               "C": [0.001, 0.01, 0.1, 1, 10, 100, 1000, 10000]},
    "perceptron": {"penalty": ["l2"],
                   "alpha": [1e-06, 1e-05, 0.0001, 0.001, 0.01]},
    "tree": {"max_depth": [2, 4, 8, 16, 32, 64, 128],
             "ccp_alpha": [0.001, 0.003, 0.005, 0.007, 0.01, 0.05, 0.1, 0.2, 0.5, 0.0]},
    "gbdt": {"max_depth": [1, 2, 4, 8],
             "n_estimators": [100, 200, 500],
             "reg_lambda": [0.0, 1e-6, 1e-3, 0.1, 1.0, 1e6, 1e7]},
}


def default_grid(family_kind: str) -> ModelFamily:
    """Full Cartesian hyperparameter grid for one model family."""
    if family_kind not in _DEFAULT_GRIDS:
        raise ValueError(f"unknown family kind {family_kind!r}")
    axes = _DEFAULT_GRIDS[family_kind]
    keys = list(axes)
    grid = tuple(
        trained(family_kind, **dict(zip(keys, combo)))
        for combo in itertools.product(*(axes[k] for k in keys))
    )
    return ModelFamily(family_kind, grid)


# --------------------------------------------------------- serialization


def pack_labeling(h: Labeling) -> str:
    """Hex-pack a labeling for result records."""
    return np.packbits(np.asarray(h, dtype=np.uint8)).tobytes().hex()


def unpack_labeling(hexstr: str, n: int) -> Labeling:
    bits = np.unpackbits(np.frombuffer(bytes.fromhex(hexstr), dtype=np.uint8))
    return bits[:n].astype(np.int8)
