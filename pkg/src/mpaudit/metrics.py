"""Audit-economics metrics over model families.

Ties together the audit and diameter machinery: manipulability under
the random-audit baseline, cross-validated model selection, and the
accuracy a platform gives up by picking its family's most manipulable
class instead of its most accurate one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audit import random_audit
from .dataspace import DataError, Dataset
from .diameter import (ReductionConfig, diam_bruteforce,
                       diam_dictionary_closed_form, diam_empirical,
                       diam_exhaustive_closed_form)
from .hypotheses import HypothesisClass, Labeling, ModelFamily, TrainSpec, train

__all__ = [
    "ManipulabilityEstimate",
    "FamilyReport",
    "fit_star",
    "manipulability",
    "stratified_folds",
    "cv_accuracies",
    "select_h_opt",
    "cost_of_exhaustion",
]


@dataclass(frozen=True)
class ManipulabilityEstimate:
    """Mean version-space spread over repeated random audits."""

    mean: float
    stderr: float
    reps: int
    budget_fraction: float
    diam_kind: str

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not -1e-9 <= self.mean <= 2.0 + 1e-9:
            raise ValueError("manipulability outside [0, 2]")


@dataclass(frozen=True)
class FamilyReport:
    """Per-class metrics and the family's selection outcomes."""

    per_class: dict[str, dict[str, float]]
    h_acc_id: str
    h_mu_id: str
    h_opt_id: str
    cost_of_exhaustion: float
    ci_low: float
    ci_high: float


def fit_star(cls: HypothesisClass, dataset: Dataset, targets: np.ndarray,
             train_ids: Optional[np.ndarray] = None, seed: int = 0) -> Labeling:
    """Loss-minimizing class member for the given targets.

    Trained families fit their model; the enumerable kinds memorize the
    training targets (dictionary memory keeps the lowest-id ones) and
    predict 0 elsewhere.
    """
    targets = np.asarray(targets, dtype=np.int8)
    if cls.kind == "Trained":
        return train(cls, dataset, TrainSpec(targets=targets, train_mask=train_ids, seed=seed))
    ids = np.arange(dataset.n) if train_ids is None else np.asarray(train_ids, dtype=int)
    h = np.zeros(dataset.n, dtype=np.int8)
    h[ids] = targets[ids]
    if cls.kind == "Dictionary":
        ones = np.flatnonzero(h == 1)
        h[ones[cls.memory:]] = 0
    return h


def _rep_diameter(cls: HypothesisClass, h_star: Labeling, audit, dataset: Dataset,
                  method: str) -> float:
    if method == "closed_form":
        if cls.kind == "Exhaustive":
            return diam_exhaustive_closed_form(audit.queries, dataset)
        if cls.kind == "Dictionary":
            return diam_dictionary_closed_form(h_star, cls.memory, audit.queries, dataset)
        raise ValueError("no closed form for trained classes")
    if method == "empirical":
        if cls.kind != "Trained":
            raise ValueError("empirical method applies to trained classes")
        cfg = ReductionConfig(trainer=cls)
        return diam_empirical(cls, h_star, audit.queries, dataset, cfg).value
    if method == "brute_force":
        return diam_bruteforce(cls, h_star, audit.queries, dataset).value
    raise ValueError(f"unknown diameter method {method!r}")


def manipulability(cls: HypothesisClass, dataset: Dataset, budget_fraction: float,
                   reps: int, seed: int = 0, diam_method: str = "auto") -> ManipulabilityEstimate:
    """Mean post-audit spread under the random-audit baseline.

    Per repetition: fit the platform's loss-minimizing member on the
    ground-truth labels, sample an audit of ``budget_fraction`` of each
    group, and measure the version-space spread by the requested method.
    Audit seeds depend only on (seed, rep), so estimates for different
    classes are paired under common random numbers.
    """
    if not 0 <= budget_fraction <= 1:
        raise ValueError("budget_fraction must lie in [0, 1]")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if diam_method == "auto":
        diam_method = "empirical" if cls.kind == "Trained" else "closed_form"
    if dataset.labels is None:
        raise DataError("manipulability needs ground-truth labels")
    values = np.empty(reps)
    for r in range(reps):
        h_star = fit_star(cls, dataset, dataset.labels, seed=r)
        audit_seed = int(np.random.default_rng((seed, r)).integers(0, 2 ** 63))
        audit = random_audit(dataset, budget_fraction, budget_fraction, audit_seed)
        values[r] = _rep_diameter(cls, h_star, audit, dataset, diam_method)
    stderr = float(values.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return ManipulabilityEstimate(float(values.mean()), stderr, reps,
                                  budget_fraction, diam_method)


def stratified_folds(dataset: Dataset, folds: int, seed: int) -> np.ndarray:
    """Fold index per point, stratified on (label, sensitive)."""
    if dataset.labels is None:
        raise DataError("stratified folds need labels")
    if folds < 2:
        raise ValueError("folds must be >= 2")
    rng = np.random.default_rng(seed)
    assignment = np.empty(dataset.n, dtype=int)
    strata = dataset.labels.astype(int) * 2 + dataset.sensitive.astype(int)
    for s in np.unique(strata):
        ids = np.flatnonzero(strata == s)
        rng.shuffle(ids)
        assignment[ids] = np.arange(len(ids)) % folds
    return assignment


def cv_accuracies(cls: HypothesisClass, dataset: Dataset, folds: int = 5,
                  seed: int = 0) -> np.ndarray:
    """Validation accuracy per stratified fold."""
    assignment = stratified_folds(dataset, folds, seed)
    accs = np.empty(folds)
    for f in range(folds):
        train_ids = np.flatnonzero(assignment != f)
        val_ids = np.flatnonzero(assignment == f)
        h = fit_star(cls, dataset, dataset.labels, train_ids)
        accs[f] = float((h[val_ids] == dataset.labels[val_ids]).mean())
    return accs


def select_h_opt(family: ModelFamily, dataset: Dataset, folds: int = 5,
                 seed: int = 0) -> HypothesisClass:
    """Class with the best mean cross-validated accuracy.

    Fold assignment is shared across the grid; exact ties go to the
    lowest class id.
    """
    best = None
    for cls in family.grid:
        acc = float(cv_accuracies(cls, dataset, folds, seed).mean())
        key = (-acc, cls.class_id())
        if best is None or key < best[0]:
            best = (key, cls)
    return best[1]


def cost_of_exhaustion(family: ModelFamily, dataset: Dataset, budget_fraction: float = 0.1,
                       reps: int = 15, seed: int = 0, folds: int = 5,
                       bootstrap: int = 1000) -> FamilyReport:
    """Accuracy cost of choosing the most manipulable class in a family.

    H_acc maximizes mean cross-validated accuracy, H_mu maximizes
    manipulability; the cost is the difference of their mean accuracies
    (nonnegative since H_acc is the maximizer).  The confidence interval
    is a percentile bootstrap over the paired per-fold accuracy
    differences.
    """
    per_class: dict[str, dict[str, float]] = {}
    fold_accs: dict[str, np.ndarray] = {}
    best_acc = best_mu = None
    for cls in family.grid:
        cid = cls.class_id()
        accs = cv_accuracies(cls, dataset, folds, seed)
        est = manipulability(cls, dataset, budget_fraction, reps, seed)
        fold_accs[cid] = accs
        acc_mean = float(accs.mean())
        per_class[cid] = {"cv_accuracy": acc_mean, "manipulability": est.mean,
                          "manipulability_stderr": est.stderr}
        if best_acc is None or (-acc_mean, cid) < best_acc[0]:
            best_acc = ((-acc_mean, cid), cls)
        if best_mu is None or (-est.mean, cid) < best_mu[0]:
            best_mu = ((-est.mean, cid), cls)
    h_acc, h_mu = best_acc[1], best_mu[1]
    cost = float(fold_accs[h_acc.class_id()].mean() - fold_accs[h_mu.class_id()].mean())
    assert cost >= 0
    diffs = fold_accs[h_acc.class_id()] - fold_accs[h_mu.class_id()]
    rng = np.random.default_rng((seed, 0xC0E))
    boots = np.array([
        diffs[rng.integers(0, folds, folds)].mean() for _ in range(bootstrap)
    ])
    ci_low, ci_high = np.percentile(boots, [2.5, 97.5])
    h_opt = select_h_opt(family, dataset, folds, seed)
    return FamilyReport(per_class, h_acc.class_id(), h_mu.class_id(),
                        h_opt.class_id(), cost, float(ci_low), float(ci_high))
