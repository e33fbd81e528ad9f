"""Data model for slices: per-feature predicates, conjunctions, filters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Union

import numpy as np

__all__ = [
    "Interval",
    "IntervalUnion",
    "ValueSet",
    "FeaturePredicate",
    "Heuristic",
    "Slice",
    "SliceStats",
    "Filters",
]


class Interval(NamedTuple):
    """Closed interval over actual data values."""

    low: float
    high: float

    @property
    def width(self) -> float:
        return self.high - self.low

    def contains(self, values: np.ndarray) -> np.ndarray:
        return (values >= self.low) & (values <= self.high)


class Heuristic(str, Enum):
    CATEGORICAL = "categorical"
    HPD = "hpd"
    DT = "dt"


@dataclass(frozen=True)
class IntervalUnion:
    """Union of pairwise-disjoint closed intervals, sorted ascending."""

    intervals: tuple[Interval, ...]

    def __post_init__(self):
        if not self.intervals:
            raise ValueError("IntervalUnion needs at least one interval")
        for iv in self.intervals:
            if not (math.isfinite(iv.low) and math.isfinite(iv.high)):
                raise ValueError(f"non-finite interval bound: {iv}")
            if iv.low > iv.high:
                raise ValueError(f"inverted interval: {iv}")
        for a, b in zip(self.intervals, self.intervals[1:]):
            if b.low <= a.high:
                raise ValueError(f"intervals overlap or are unsorted: {a}, {b}")

    def contains(self, values: np.ndarray) -> np.ndarray:
        mask = np.zeros(values.shape, dtype=bool)
        for iv in self.intervals:
            mask |= iv.contains(values)
        return mask


@dataclass(frozen=True)
class ValueSet:
    """Set of category codes with their display labels, sorted by code."""

    codes: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.codes:
            raise ValueError("ValueSet needs at least one code")
        if len(self.codes) != len(self.labels):
            raise ValueError("codes and labels must align")
        if any(b <= a for a, b in zip(self.codes, self.codes[1:])):
            raise ValueError("codes must be strictly ascending")

    def contains(self, codes: np.ndarray) -> np.ndarray:
        return np.isin(codes, np.asarray(self.codes))


FeaturePredicate = Union[IntervalUnion, ValueSet]


@dataclass(frozen=True)
class Slice:
    """Conjunction of per-feature predicates over 1-3 distinct features.

    A record is a member iff it satisfies every predicate and has no missing
    value in any of the slice's features.
    """

    predicates: tuple[tuple[str, FeaturePredicate], ...]
    heuristic: Heuristic
    order: int

    def __post_init__(self):
        names = [name for name, _ in self.predicates]
        if sorted(names) != names or len(set(names)) != len(names):
            raise ValueError("predicates must be sorted by unique feature name")
        if self.order != len(names):
            raise ValueError(f"order {self.order} != {len(names)} features")
        if not 1 <= self.order <= 3:
            raise ValueError(f"order must be 1..3, got {self.order}")

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.predicates)

    def predicate_key(self) -> tuple:
        """Canonical key identifying the predicate, ignoring provenance."""
        parts = []
        for name, pred in self.predicates:
            if isinstance(pred, ValueSet):
                parts.append((name, "set", pred.codes))
            else:
                parts.append((name, "union", tuple(pred.intervals)))
        return tuple(parts)


def make_slice(predicates: dict[str, FeaturePredicate],
               heuristic: Heuristic) -> Slice:
    items = tuple(sorted(predicates.items()))
    return Slice(predicates=items, heuristic=heuristic, order=len(items))


@dataclass(frozen=True)
class SliceStats:
    """Exact counts for a slice plus its hypergeometric significance."""

    support: int
    correct: int
    performance: float
    p_value: float

    def __post_init__(self):
        if self.correct > self.support:
            raise ValueError("correct count exceeds support")


@dataclass(frozen=True)
class Filters:
    """The three reporting gates: support, performance gap, significance."""

    min_support: int
    perf_threshold: float
    p_value_max: float = 0.05

    def __post_init__(self):
        if self.min_support < 2:
            raise ValueError(f"min_support must be >= 2, got {self.min_support}")
        if not 0.0 < self.p_value_max < 1.0:
            raise ValueError(f"p_value_max must be in (0, 1), got {self.p_value_max}")
