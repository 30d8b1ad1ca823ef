"""Finite input spaces, sensitive-group partitions and parity measures.

The whole engine works on a finite set of points carrying a binary
sensitive attribute.  All probabilities are frequencies under the uniform
distribution on that finite set; nothing here is stochastic except
:func:`gen_synthetic`, which is a pure function of its seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "SamplePoint",
    "GroupCounts",
    "EventPredicate",
    "DemographicParity",
    "load_csv",
    "gen_synthetic",
    "measure_mu",
    "measure_parity_general",
]


class DataError(ValueError):
    """Invalid dataset construction or an undefined measure."""


@dataclass(frozen=True)
class SamplePoint:
    """One element of the input space."""

    id: int
    features: tuple[float, ...]
    sensitive: int
    label: Optional[int] = None


@dataclass(frozen=True)
class GroupCounts:
    """Cached group sizes for the full space and an audit set."""

    nA: int
    nNotA: int
    sA: int = 0
    sNotA: int = 0

    def __post_init__(self):
        if self.nA + self.nNotA < 2:
            raise DataError("need at least two points")
        if not (0 <= self.sA <= self.nA and 0 <= self.sNotA <= self.nNotA):
            raise DataError("audit counts exceed group sizes")


class Dataset:
    """Immutable finite input space with a binary sensitive attribute.

    Point ids are 0..n-1 in construction order and stable for the whole
    run.  Both sensitive groups must be nonempty.
    """

    def __init__(self, points: Sequence[SamplePoint], feature_names: Sequence[str]):
        if len(points) < 2:
            raise DataError("need at least two points")
        for i, p in enumerate(points):
            if p.id != i:
                raise DataError(f"point ids must be 0..n-1 in order, got {p.id} at {i}")
            if len(p.features) != len(feature_names):
                raise DataError(f"point {i}: {len(p.features)} features, expected {len(feature_names)}")
        self.points = tuple(points)
        self.feature_names = tuple(feature_names)
        self.n = len(points)
        self.sensitive = np.array([p.sensitive for p in points], dtype=np.int8)
        if not ((self.sensitive == 0) | (self.sensitive == 1)).all():
            raise DataError("sensitive attribute must be binary")
        self.features = np.array([p.features for p in points], dtype=float)
        labels = [p.label for p in points]
        self.labels = None if any(l is None for l in labels) else np.array(labels, dtype=np.int8)
        self.group_a = np.flatnonzero(self.sensitive == 1)
        self.group_not_a = np.flatnonzero(self.sensitive == 0)
        if len(self.group_a) == 0:
            raise DataError("group X_A empty")
        if len(self.group_not_a) == 0:
            raise DataError("group not-X_A empty")

    @property
    def nA(self) -> int:
        return len(self.group_a)

    @property
    def nNotA(self) -> int:
        return len(self.group_not_a)

    def group_counts(self, subset: Sequence[int] = ()) -> GroupCounts:
        sub = np.asarray(list(subset), dtype=int)
        sA = int((self.sensitive[sub] == 1).sum()) if sub.size else 0
        return GroupCounts(self.nA, self.nNotA, sA, (len(sub) - sA) if sub.size else 0)


@dataclass(frozen=True)
class EventPredicate:
    """Named total predicate over (features, sensitive, label).

    Selects the conditioning event for a parity measure.  The predicate
    must be defined on every point; label-dependent events on unlabeled
    data are a construction-time error when evaluated.
    """

    name: str
    fn: Callable[[SamplePoint], bool]
    needs_label: bool = False

    def mask(self, dataset: Dataset) -> np.ndarray:
        if self.needs_label and dataset.labels is None:
            raise DataError(f"event {self.name!r} needs labels but dataset is unlabeled")
        return np.array([bool(self.fn(p)) for p in dataset.points])


DemographicParity = EventPredicate("demographic_parity", lambda p: p.sensitive == 1)


def _as_bits(h, n: int) -> np.ndarray:
    bits = np.asarray(h, dtype=np.int8)
    if bits.shape != (n,):
        raise DataError(f"labeling has shape {bits.shape}, expected ({n},)")
    if not ((bits == 0) | (bits == 1)).all():
        raise DataError("labeling entries must be 0/1")
    return bits


def measure_mu(h, subset: Sequence[int], dataset: Dataset) -> float:
    """Demographic parity of labeling ``h`` restricted to ``subset``.

    Positive-rate difference between the sensitive and non-sensitive
    group under the uniform distribution on the subset.
    """
    return measure_parity_general(h, subset, DemographicParity, dataset)


def measure_parity_general(h, subset: Sequence[int], event: EventPredicate, dataset: Dataset) -> float:
    bits = _as_bits(h, dataset.n)
    idx = np.asarray(list(subset), dtype=int)
    in_event = event.mask(dataset)[idx] if idx.size else np.zeros(0, dtype=bool)
    ne, nne = int(in_event.sum()), int((~in_event).sum())
    if ne == 0 or nne == 0:
        raise DataError(f"measure undefined on subset: event {event.name!r} or its complement is empty")
    pos = bits[idx] == 1
    return float(pos[in_event].sum() / ne - pos[~in_event].sum() / nne)


def _encode_columns(header, rows, sensitive_column, label_column, schema):
    schema = dict(schema or {})
    sens_map = schema.get("sensitive_map")  # e.g. {"F": 1, "M": 0}
    label_map = schema.get("label_map")
    if sensitive_column not in header:
        raise DataError(f"missing column {sensitive_column!r}")
    if label_column is not None and label_column not in header:
        raise DataError(f"missing column {label_column!r}")
    feat_cols = [c for c in header if c not in (sensitive_column, label_column)]

    def binval(raw, mapping, colname):
        if mapping is not None:
            if raw not in mapping:
                raise DataError(f"column {colname!r}: value {raw!r} not in declared mapping")
            return int(mapping[raw])
        if raw not in ("0", "1"):
            raise DataError(f"column {colname!r}: non-binary value {raw!r}")
        return int(raw)

    # Column typing: numeric pass-through, else one-hot with lexicographic
    # category order so feature indices are deterministic across runs.
    col_values = {c: [r[c] for r in rows] for c in feat_cols}
    numeric: dict[str, bool] = {}
    for c in feat_cols:
        try:
            for v in col_values[c]:
                if v == "":
                    raise DataError(f"column {c!r}: missing value")
                float(v)
            numeric[c] = True
        except DataError:
            raise
        except ValueError:
            numeric[c] = False
    names: list[str] = []
    encoders = []
    for c in feat_cols:
        if numeric[c]:
            names.append(c)
            encoders.append((c, None))
        else:
            cats = sorted(set(col_values[c]))
            names.extend(f"{c}={cat}" for cat in cats)
            encoders.append((c, cats))
    points = []
    for i, r in enumerate(rows):
        feats: list[float] = []
        for c, cats in encoders:
            if cats is None:
                feats.append(float(r[c]))
            else:
                feats.extend(1.0 if r[c] == cat else 0.0 for cat in cats)
        sens = binval(r[sensitive_column], sens_map, sensitive_column)
        lab = None if label_column is None else binval(r[label_column], label_map, label_column)
        points.append(SamplePoint(i, tuple(feats), sens, lab))
    return points, names


def load_csv(path, sensitive_column: str, label_column: Optional[str] = None, schema: Optional[dict] = None) -> Dataset:
    """Load a UTF-8 comma-separated file with a header row.

    Categorical features are one-hot encoded (lexicographic category
    order); numeric features pass through.  Point order is file order.
    Missing values and non-binary sensitive/label values are rejected.
    """
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        rows = list(reader)
    points, names = _encode_columns(reader.fieldnames, rows, sensitive_column, label_column, schema)
    return Dataset(points, names)


def gen_synthetic(n: int, p_sensitive: float, label_model: Optional[dict] = None, seed: int = 0) -> Dataset:
    """Generate a synthetic labeled space with an exact sensitive count.

    Exactly ``round(n * p_sensitive)`` points carry sensitive=1, so
    closed-form group arithmetic needs no stochastic tolerance.  Features
    are Gaussian with a group-dependent mean shift (rows are distinct
    almost surely) and the sensitive bit is appended as the last feature
    column.  Labels come from a noisy linear score.  Output is
    bit-identical for identical arguments.
    """
    if not 0 < p_sensitive < 1:
        raise DataError("p_sensitive must be in (0, 1)")
    if n < 2:
        raise DataError("n must be at least 2")
    k = int(round(n * p_sensitive))
    if k == 0 or k == n:
        raise DataError(f"n*p_sensitive rounds to {k}; both groups must be nonempty")
    cfg = {"dim": 4, "noise": 0.2, "shift": 0.5, **(label_model or {})}
    d = int(cfg["dim"])
    rng = np.random.default_rng(seed)
    sensitive = np.zeros(n, dtype=np.int8)
    sensitive[rng.permutation(n)[:k]] = 1
    x = rng.standard_normal((n, d))
    x[:, 0] += cfg["shift"] * sensitive
    w = rng.standard_normal(d)
    score = x @ w + cfg["noise"] * rng.standard_normal(n)
    labels = (score > np.median(score)).astype(np.int8)
    feats = np.column_stack([x, sensitive.astype(float)])
    names = [f"f{j}" for j in range(d)] + ["sensitive"]
    points = [
        SamplePoint(i, tuple(feats[i]), int(sensitive[i]), int(labels[i]))
        for i in range(n)
    ]
    return Dataset(points, names)
