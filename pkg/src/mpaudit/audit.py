"""Auditor-side operations: random sampling, consistency, exact cost.

The random audit samples each sensitive group independently without
replacement.  The exact cost function is the minimal adaptive query
count guaranteeing a version-space spread below a tolerance, computed
by memoized recursion over canonicalized version spaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataspace import DataError, Dataset, measure_mu
from .hypotheses import HypothesisClass, Labeling

__all__ = [
    "AuditSet",
    "AuditReport",
    "CostCapError",
    "random_audit",
    "record_answers",
    "check_consistency",
    "exact_cost",
    "audit_report",
]


@dataclass
class AuditSet:
    """Ordered queried points with recorded platform answers."""

    queries: tuple[int, ...]
    answers: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if len(set(self.queries)) != len(self.queries):
            raise ValueError("duplicate point ids in audit set")
        if self.answers is not None and len(self.answers) != len(self.queries):
            raise ValueError("answers length must match queries")

    def __len__(self):
        return len(self.queries)

    def to_jsonl(self) -> str:
        ans = self.answers or (None,) * len(self.queries)
        return "\n".join(json.dumps({"query": q, "answer": a}) for q, a in zip(self.queries, ans))

    @classmethod
    def from_jsonl(cls, text: str) -> "AuditSet":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        queries = tuple(r["query"] for r in rows)
        answers = tuple(r["answer"] for r in rows)
        return cls(queries, None if any(a is None for a in answers) else answers)


@dataclass(frozen=True)
class AuditReport:
    """Fidelity and manipulation-proofness verdict for one audit."""

    mu_hat: float
    mu_true: float
    fidelity_gap: float
    diameter: float
    epsilon_audit: float
    fidelity_ok: bool
    mp_ok: bool


class CostCapError(RuntimeError):
    def __init__(self, frontier: int, cap: int):
        super().__init__(f"cost recursion reached {frontier} states, cap is {cap}")
        self.frontier = frontier
        self.cap = cap


def random_audit(dataset: Dataset, beta1: float, beta2: float, seed: int) -> AuditSet:
    """Uniform without-replacement sampling per sensitive group.

    Draws floor(beta1 * |X_A|) points from the sensitive group and
    floor(beta2 * |not-X_A|) from the other; the audit set is their
    disjoint union, in draw order.
    """
    if not (0 <= beta1 <= 1 and 0 <= beta2 <= 1):
        raise ValueError("proportions must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    s_pos = int(np.floor(beta1 * dataset.nA))
    s_neg = int(np.floor(beta2 * dataset.nNotA))
    picked_a = rng.choice(dataset.group_a, size=s_pos, replace=False) if s_pos else np.empty(0, int)
    picked_n = rng.choice(dataset.group_not_a, size=s_neg, replace=False) if s_neg else np.empty(0, int)
    return AuditSet(tuple(int(i) for i in np.concatenate([picked_a, picked_n])))


def record_answers(audit: AuditSet, h_star: Labeling) -> AuditSet:
    if audit.answers is not None:
        raise ValueError("answers already recorded")
    h = np.asarray(h_star)
    return AuditSet(audit.queries, tuple(int(h[q]) for q in audit.queries))


def check_consistency(h_prime: Labeling, audit: AuditSet) -> bool:
    if audit.answers is None:
        raise ValueError("audit has no recorded answers")
    h = np.asarray(h_prime)
    return all(int(h[q]) == a for q, a in zip(audit.queries, audit.answers))


def _vs_diameter(cls: HypothesisClass, dataset: Dataset, queried: dict[int, int]) -> Optional[float]:
    """Spread of the version space canonicalized by (queried ids, answers).

    Returns None for an empty version space.  Empty and singleton spaces
    have spread 0.
    """
    nA, nN = dataset.nA, dataset.nNotA
    sens = dataset.sensitive
    sA = sum(1 for q in queried if sens[q] == 1)
    sN = len(queried) - sA
    if cls.kind == "Exhaustive":
        return 2.0 - (sA / nA + sN / nN)
    if cls.kind == "Dictionary":
        ones = sum(queried.values())
        if ones > cls.memory:
            return None
        m_free = cls.memory - ones
        return min(nA - sA, m_free) / nA + min(nN - sN, m_free) / nN
    raise ValueError("exact cost requires an enumerable class")


def exact_cost(cls: HypothesisClass, dataset: Dataset, epsilon: float,
               cap: int = 2_000_000) -> int:
    """Minimal adaptive query count forcing spread below ``epsilon``.

    Recursion: 0 once the version-space spread is below epsilon, else
    one query plus the best worst-case answer branch, memoized on the
    canonical (sorted queried ids, answers) pair.
    """
    memo: dict[tuple, int] = {}
    n = dataset.n

    def cost(queried: dict[int, int]) -> int:
        key = tuple(sorted(queried.items()))
        if key in memo:
            return memo[key]
        if len(memo) > cap:
            raise CostCapError(len(memo), cap)
        diam = _vs_diameter(cls, dataset, queried)
        if diam is None or diam < epsilon:
            memo[key] = 0
            return 0
        best = None
        for x in range(n):
            if x in queried:
                continue
            worst = 0
            for y in (0, 1):
                queried[x] = y
                if _vs_diameter(cls, dataset, queried) is not None:
                    worst = max(worst, cost(queried))
                del queried[x]
            if best is None or worst < best:
                best = worst
        assert best is not None, "spread above epsilon with no splitting query"
        memo[key] = 1 + best
        return 1 + best

    return cost({})


def audit_report(h_star: Labeling, audit: AuditSet, diameter: float,
                 epsilon: float, dataset: Dataset) -> AuditReport:
    """Fidelity and manipulation-proofness checks for a recorded audit."""
    if audit.answers is None:
        audit = record_answers(audit, h_star)
    mu_hat = measure_mu(h_star, audit.queries, dataset)  # raises if a group is unqueried
    mu_true = measure_mu(h_star, range(dataset.n), dataset)
    gap = abs(mu_hat - mu_true)
    return AuditReport(
        mu_hat=mu_hat, mu_true=mu_true, fidelity_gap=gap,
        diameter=diameter, epsilon_audit=epsilon,
        fidelity_ok=gap < epsilon, mp_ok=diameter < epsilon,
    )
