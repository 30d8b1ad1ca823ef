"""Version-space spread: closed forms, brute force and empirical bounds.

The spread ("diameter") of a version space under the parity measure is
the worst post-audit swing a platform can realize while staying
consistent with its recorded answers.  Closed forms cover the
exhaustive and dictionary classes; trained families get a certified
lower bound from constrained weighted fits.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .audit import AuditSet, record_answers
from .dataspace import Dataset, measure_mu
from .hypotheses import HypothesisClass, Labeling, TrainSpec, enumerate_consistent, train

__all__ = [
    "DiameterResult",
    "ReductionConfig",
    "diam_bruteforce",
    "diam_exhaustive_closed_form",
    "diam_dictionary_closed_form",
    "benign_overfitting_lower_bound",
    "diam_empirical",
    "optimal_dictionary_audit",
]


@dataclass(frozen=True)
class DiameterResult:
    value: float
    kind: str  # closed_form | brute_force | empirical_lower_bound
    h_up: Optional[Labeling] = None
    h_down: Optional[Labeling] = None
    violations_up: int = 0
    violations_down: int = 0

    @property
    def certified(self) -> bool:
        return self.violations_up == 0 and self.violations_down == 0

    def to_json(self) -> str:
        def digest(h):
            if h is None:
                return None
            return hashlib.sha256(np.asarray(h, dtype=np.uint8).tobytes()).hexdigest()[:16]

        return json.dumps({
            "value": self.value, "kind": self.kind,
            "violations_up": self.violations_up, "violations_down": self.violations_down,
            "certified": self.certified,
            "h_up_digest": digest(self.h_up), "h_down_digest": digest(self.h_down),
        })


@dataclass(frozen=True)
class ReductionConfig:
    """Consistency-weight schedule for the empirical estimator."""

    trainer: HypothesisClass
    lambda0: Optional[float] = None  # default: 10 * max group weight
    escalation: float = 10.0
    max_rounds: int = 6
    restarts: int = 1

    def __post_init__(self):
        if self.escalation <= 1 or self.max_rounds < 1:
            raise ValueError("escalation must exceed 1 and max_rounds be >= 1")


def _group_audit_counts(audit: Sequence[int], dataset: Dataset):
    idx = np.asarray(list(audit), dtype=int)
    sA = int((dataset.sensitive[idx] == 1).sum()) if idx.size else 0
    sN = len(idx) - sA
    return sA, sN


def diam_exhaustive_closed_form(audit: Sequence[int], dataset: Dataset) -> float:
    """Spread of the all-functions class: depends only on group coverage."""
    sA, sN = _group_audit_counts(audit, dataset)
    return 2.0 - (sA / dataset.nA + sN / dataset.nNotA)


def diam_dictionary_closed_form(d_star: Labeling, m: int, audit: Sequence[int],
                                dataset: Dataset) -> float:
    """Spread of the memory-m dictionary class around ``d_star``."""
    d = np.asarray(d_star, dtype=np.int8)
    if int((d == 1).sum()) > m:
        raise ValueError("platform dictionary has more ones than its memory")
    idx = np.asarray(list(audit), dtype=int)
    ones_on_s = int((d[idx] == 1).sum()) if idx.size else 0
    m_free = m - ones_on_s
    sA, sN = _group_audit_counts(audit, dataset)
    return (min(dataset.nA - sA, m_free) / dataset.nA
            + min(dataset.nNotA - sN, m_free) / dataset.nNotA)


def diam_bruteforce(cls: HypothesisClass, h_star: Labeling, audit: Sequence[int],
                    dataset: Dataset, cap: int = 2 ** 24) -> DiameterResult:
    """Oracle spread by full enumeration of the version space."""
    full = range(dataset.n)
    best_up = best_down = None
    mu_up = -np.inf
    mu_down = np.inf
    for h in enumerate_consistent(cls, h_star, audit, dataset, cap=cap):
        mu = measure_mu(h, full, dataset)
        if mu > mu_up:
            mu_up, best_up = mu, h
        if mu < mu_down:
            mu_down, best_down = mu, h
    if best_up is None:
        raise ValueError("empty version space")
    return DiameterResult(mu_up - mu_down, "brute_force", best_up, best_down)


def benign_overfitting_lower_bound(audit: Sequence[int], epsilon_fit: float,
                                   dataset: Dataset) -> float:
    """Spread lower bound for interpolating classes with off-audit error.

    May be negative (vacuous); returned unclamped.
    """
    if not 0 <= epsilon_fit < 1:
        raise ValueError("epsilon_fit must lie in [0, 1)")
    sA, sN = _group_audit_counts(audit, dataset)
    s_frac = (sA + sN) / dataset.n
    return (sA / dataset.nA + sN / dataset.nNotA
            - 2.0 * s_frac - 2.0 * epsilon_fit * (1.0 - s_frac))


def diam_empirical(family_class: HypothesisClass, h_star: Labeling,
                   audit: Sequence[int], dataset: Dataset,
                   cfg: Optional[ReductionConfig] = None) -> DiameterResult:
    """Lower-bound spread via weighted-classification fits.

    Each direction trains on targets equal to the platform answers on
    the audit set and the (negated) sensitive attribute elsewhere.
    Off-audit weights are exactly the coefficient of each prediction in
    the parity value, so weighted accuracy is an affine transform of the
    parity measure plus a consistency penalty; the penalty escalates
    until the fit reproduces the recorded answers or rounds run out.
    """
    if cfg is None:
        raise ValueError("cfg with a Trained class is required")
    h_star = np.asarray(h_star, dtype=np.int8)
    idx = np.asarray(list(audit), dtype=int)
    on_s = np.zeros(dataset.n, dtype=bool)
    on_s[idx] = True
    group_w = np.where(dataset.sensitive == 1, 1.0 / dataset.nA, 1.0 / dataset.nNotA)
    lam0 = cfg.lambda0 if cfg.lambda0 is not None else 10.0 * float(group_w.max())
    recorded = record_answers(AuditSet(tuple(int(i) for i in idx)), h_star)
    full = range(dataset.n)

    def one_direction(off_targets: np.ndarray, sign: float):
        targets = np.where(on_s, h_star, off_targets).astype(np.int8)
        best_mu, best_h, best_viol = None, None, None
        lam = lam0
        for rnd in range(cfg.max_rounds):
            weights = np.where(on_s, lam, group_w)
            for restart in range(cfg.restarts):
                h = train(family_class, dataset,
                          TrainSpec(targets=targets, weights=weights,
                                    train_mask=None, seed=restart))
                viol = sum(int(h[q]) != a for q, a in zip(recorded.queries, recorded.answers))
                mu = measure_mu(h, full, dataset)
                better = (best_viol is None or viol < best_viol
                          or (viol == best_viol and sign * mu > sign * best_mu))
                if better:
                    best_mu, best_h, best_viol = mu, h, viol
            if best_viol == 0:
                break
            lam *= cfg.escalation
        return best_mu, best_h, best_viol

    mu_up, h_up, viol_up = one_direction(dataset.sensitive.astype(np.int8), +1.0)
    mu_down, h_down, viol_down = one_direction((1 - dataset.sensitive).astype(np.int8), -1.0)
    # a weak directional fit can land below the other side's optimum; the
    # true diameter is nonnegative, so 0 remains a valid lower bound
    return DiameterResult(max(mu_up - mu_down, 0.0), "empirical_lower_bound",
                          h_up, h_down, viol_up, viol_down)


def optimal_dictionary_audit(m: int, budget: int, dataset: Dataset,
                             d_star_ones_available: tuple[int, int],
                             group_split: Optional[tuple[int, int]] = None):
    """Best achievable dictionary spread for a fixed audit budget.

    The spread depends on the audit set only through its composition:
    counts of queried points per (group, stored-one) cell.  The group
    split matches the random baseline (floor(budget/n * group size) per
    group), since proportions are the only lever the sampling strategy
    exposes; within each group the point choice is optimized over all
    feasible compositions.  Returns the minimum and a witness
    composition (a, b, c, e) = counts in (X_A & ones, X_A & zeros,
    not-X_A & ones, not-X_A & zeros).
    """
    if budget > dataset.n or budget < 0:
        raise ValueError("budget must lie in [0, n]")
    ones_a, ones_n = d_star_ones_available
    nA, nN = dataset.nA, dataset.nNotA
    if not (0 <= ones_a <= nA and 0 <= ones_n <= nN and ones_a + ones_n <= m):
        raise ValueError("infeasible ones placement for the given memory")
    if group_split is None:
        beta = budget / dataset.n
        sp, sn = int(np.floor(beta * nA)), int(np.floor(beta * nN))
    else:
        sp, sn = group_split
    if sp > nA or sn > nN:
        raise ValueError("infeasible budget split")
    best = None
    for a in range(max(0, sp - (nA - ones_a)), min(sp, ones_a) + 1):
        b = sp - a
        for c in range(max(0, sn - (nN - ones_n)), min(sn, ones_n) + 1):
            e = sn - c
            m_free = m - (a + c)
            val = (min(nA - sp, m_free) / nA + min(nN - sn, m_free) / nN)
            if best is None or val < best[0]:
                best = (val, (a, b, c, e))
    assert best is not None
    return best
