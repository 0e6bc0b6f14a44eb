"""Tree-derived attribute weights and importance-performance quadrants."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping

from .cart import DecisionTree, split_gain_exact


class Quadrant(str, Enum):
    PRIORITY_IMPROVE = "Q1"   # high weight, low score
    KEEP_UP = "Q2"            # high weight, high score
    LOW_PRIORITY = "Q3"       # low weight, low score
    POSSIBLE_OVERKILL = "Q4"  # low weight, high score

    @property
    def priority(self) -> int:
        return int(self.value[1])

    @property
    def label(self) -> str:
        return _QUADRANT_LABELS[self]


_QUADRANT_LABELS = {
    Quadrant.PRIORITY_IMPROVE: "priority improve",
    Quadrant.KEEP_UP: "keep up",
    Quadrant.LOW_PRIORITY: "low priority",
    Quadrant.POSSIBLE_OVERKILL: "possible overkill",
}


def attribute_weights_exact(t: DecisionTree) -> dict[str, Fraction]:
    n_root = t.root.n
    weights = {name: Fraction(0) for i, name in enumerate(t.attribute_names)
               if i != t.overall_index}
    for node in t.internal_nodes():
        gain = split_gain_exact(node.class_counts, node.left.class_counts,
                                node.right.class_counts)
        weights[t.attribute_names[node.split.attribute]] += Fraction(node.n, n_root) * gain
    return weights


def attribute_weights(t: DecisionTree) -> dict[str, float]:
    """Sample-fraction-weighted Gini decrease summed over each attribute's splits.

    Attributes never used as a splitter get exactly 0. Weights are not
    normalized; they sum to the root impurity minus the tree's training
    error.
    """
    return {k: float(v) for k, v in attribute_weights_exact(t).items()}


@dataclass(frozen=True)
class IpaEntry:
    attribute: str
    mean: float
    weight: float
    quadrant: Quadrant

    @property
    def initial_priority(self) -> int:
        return self.quadrant.priority


@dataclass(frozen=True)
class IpaResult:
    entries: tuple[IpaEntry, ...]
    grand_mean: float
    mean_weight: float

    def __getitem__(self, attribute: str) -> IpaEntry:
        for e in self.entries:
            if e.attribute == attribute:
                return e
        raise KeyError(attribute)

    def __iter__(self):
        return iter(self.entries)

    def in_quadrant(self, q: Quadrant) -> list[str]:
        return [e.attribute for e in self.entries if e.quadrant is q]

    def priorities(self) -> dict[str, int]:
        return {e.attribute: e.initial_priority for e in self.entries}

    def to_dict(self) -> dict:
        return {
            "grand_mean": self.grand_mean,
            "mean_weight": self.mean_weight,
            "attributes": [
                {"attribute": e.attribute, "mean": e.mean, "weight": e.weight,
                 "quadrant": e.quadrant.value, "initial_priority": e.initial_priority}
                for e in self.entries
            ],
        }


def classify_point(mean: float, weight: float, grand_mean: float, mean_weight: float) -> Quadrant:
    # equality falls on the not-high / not-low side
    high = weight > mean_weight
    low = mean < grand_mean
    if high:
        return Quadrant.PRIORITY_IMPROVE if low else Quadrant.KEEP_UP
    return Quadrant.LOW_PRIORITY if low else Quadrant.POSSIBLE_OVERKILL


def ipa_classify(means: Mapping[str, float], weights: Mapping[str, float],
                 nonzero_weight_mean: bool = False) -> IpaResult:
    """Place every attribute in one of the four IPA quadrants.

    Origin is the mean of the attribute means and the mean of the weights.
    Only attributes present in ``weights`` are classified, in their order;
    the overall-quality attribute should not be among them.
    """
    attrs = list(weights)
    if len(attrs) < 2:
        raise ValueError("IPA needs at least 2 attributes")
    missing = [a for a in attrs if a not in means]
    if missing:
        raise KeyError(f"no mean for {missing}")
    grand_mean = sum(means[a] for a in attrs) / len(attrs)
    pool = [weights[a] for a in attrs]
    if nonzero_weight_mean:
        pool = [w for w in pool if w > 0] or pool
    mean_weight = sum(pool) / len(pool)
    entries = tuple(
        IpaEntry(a, float(means[a]), float(weights[a]),
                 classify_point(means[a], weights[a], grand_mean, mean_weight))
        for a in attrs
    )
    return IpaResult(entries, grand_mean, mean_weight)
