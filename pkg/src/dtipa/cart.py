"""CART classification tree grown on Gini impurity.

The overall-quality column is the class label; every other attribute is a
candidate splitter. Scores are integers, so the only distinct cut points
are the midpoints between consecutive scale values. Candidate gains are
compared in exact rational arithmetic so that tie-breaking (lowest
attribute index, then lowest threshold) never depends on rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .survey import SurveyMatrix


@dataclass(frozen=True)
class ClassCounts:
    counts: Mapping[int, int]

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("class counts must be nonnegative")
        clean = {int(k): int(v) for k, v in sorted(self.counts.items()) if v}
        object.__setattr__(self, "counts", clean)

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> "ClassCounts":
        values, counts = np.unique(np.asarray(list(labels), dtype=np.int64), return_counts=True)
        return cls(dict(zip(values.tolist(), counts.tolist())))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def get(self, label: int) -> int:
        return self.counts.get(label, 0)

    def majority(self) -> int:
        """Most frequent class; ties go to the lower class score."""
        if not self.counts:
            raise ValueError("empty node")
        best = max(self.counts.values())
        return min(k for k, v in self.counts.items() if v == best)

    def __add__(self, other: "ClassCounts") -> "ClassCounts":
        keys = set(self.counts) | set(other.counts)
        return ClassCounts({k: self.get(k) + other.get(k) for k in keys})

    def to_dict(self) -> dict[str, int]:
        return {str(k): v for k, v in self.counts.items()}


def _sum_sq_over_n(c: ClassCounts) -> Fraction:
    n = c.total
    return Fraction(sum(v * v for v in c.counts.values()), n)


def gini_exact(c: ClassCounts) -> Fraction:
    n = c.total
    if n == 0:
        raise ValueError("empty node")
    return 1 - Fraction(sum(v * v for v in c.counts.values()), n * n)


def gini(c: ClassCounts) -> float:
    """1 - sum_k (n_k / n)^2."""
    return float(gini_exact(c))


def split_gain_exact(parent: ClassCounts, left: ClassCounts, right: ClassCounts) -> Fraction:
    if (left + right).counts != parent.counts:
        raise ValueError("left and right do not partition parent")
    if left.total == 0 or right.total == 0:
        raise ValueError("empty child in split")
    n = parent.total
    return gini_exact(parent) - (Fraction(left.total, n) * gini_exact(left)
                                 + Fraction(right.total, n) * gini_exact(right))


def split_gain(parent: ClassCounts, left: ClassCounts, right: ClassCounts) -> float:
    """Impurity decrease of the parent when split into ``left``/``right``."""
    return float(split_gain_exact(parent, left, right))


@dataclass(frozen=True)
class Split:
    attribute: int
    threshold: float

    def goes_left(self, value) -> bool:
        return value <= self.threshold


@dataclass(frozen=True)
class TreeNode:
    node_id: int
    class_counts: ClassCounts
    member_rows: tuple[int, ...]
    split: Split | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    def __post_init__(self):
        if (self.split is None) != (self.left is None) or (self.left is None) != (self.right is None):
            raise ValueError("split present iff both children present")

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def n(self) -> int:
        return self.class_counts.total

    def walk(self) -> Iterator["TreeNode"]:
        """Preorder traversal."""
        yield self
        if not self.is_leaf:
            yield from self.left.walk()
            yield from self.right.walk()

    def leaves(self) -> list["TreeNode"]:
        return [node for node in self.walk() if node.is_leaf]


@dataclass(frozen=True)
class GrowthConfig:
    min_leaf_size: int = 5
    min_child_size: int = 1
    thresholds: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {"min_leaf_size": self.min_leaf_size, "min_child_size": self.min_child_size,
                "thresholds": list(self.thresholds)}


@dataclass(frozen=True)
class DecisionTree:
    root: TreeNode
    attribute_names: tuple[str, ...]
    overall_index: int
    class_labels: tuple[int, ...]
    growth_config: GrowthConfig = field(default_factory=GrowthConfig)

    def nodes(self) -> list[TreeNode]:
        return list(self.root.walk())

    def node(self, node_id: int) -> TreeNode:
        for n in self.root.walk():
            if n.node_id == node_id:
                return n
        raise KeyError(node_id)

    def leaves(self) -> list[TreeNode]:
        return self.root.leaves()

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    def internal_nodes(self) -> list[TreeNode]:
        return [n for n in self.root.walk() if not n.is_leaf]

    def node_ids(self) -> frozenset[int]:
        return frozenset(n.node_id for n in self.root.walk())

    def depth(self) -> int:
        def _d(node):
            return 0 if node.is_leaf else 1 + max(_d(node.left), _d(node.right))
        return _d(self.root)

    def leaf_for(self, row: Sequence[int]) -> TreeNode:
        node = self.root
        while not node.is_leaf:
            node = node.left if node.split.goes_left(row[node.split.attribute]) else node.right
        return node

    def collapse(self, node_id: int) -> "DecisionTree":
        """Copy of the tree with ``node_id``'s subtree replaced by a leaf."""
        def _rebuild(node: TreeNode) -> TreeNode:
            if node.node_id == node_id:
                return replace(node, split=None, left=None, right=None)
            if node.is_leaf:
                return node
            return replace(node, left=_rebuild(node.left), right=_rebuild(node.right))
        return replace(self, root=_rebuild(self.root))

    def to_dict(self) -> dict:
        nodes = []
        for n in self.root.walk():
            nodes.append({
                "node_id": n.node_id,
                "n": n.n,
                "class_counts": n.class_counts.to_dict(),
                "split": None if n.is_leaf else {
                    "attribute": self.attribute_names[n.split.attribute],
                    "threshold": n.split.threshold,
                },
                "left": None if n.is_leaf else n.left.node_id,
                "right": None if n.is_leaf else n.right.node_id,
                "member_rows": list(n.member_rows),
            })
        return {
            "attribute_names": list(self.attribute_names),
            "overall": self.attribute_names[self.overall_index],
            "class_labels": list(self.class_labels),
            "growth_config": self.growth_config.to_dict(),
            "n_leaves": self.n_leaves,
            "depth": self.depth(),
            "nodes": nodes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTree":
        names = tuple(data["attribute_names"])
        by_id = {d["node_id"]: d for d in data["nodes"]}

        def _build(node_id: int) -> TreeNode:
            d = by_id[node_id]
            counts = ClassCounts({int(k): v for k, v in d["class_counts"].items()})
            if d["split"] is None:
                return TreeNode(node_id, counts, tuple(d["member_rows"]))
            split = Split(names.index(d["split"]["attribute"]), float(d["split"]["threshold"]))
            return TreeNode(node_id, counts, tuple(d["member_rows"]), split,
                            _build(d["left"]), _build(d["right"]))

        gc = data.get("growth_config", {})
        config = GrowthConfig(gc.get("min_leaf_size", 5), gc.get("min_child_size", 1),
                              tuple(gc.get("thresholds", ())))
        return cls(_build(data["nodes"][0]["node_id"]), names, names.index(data["overall"]),
                   tuple(data["class_labels"]), config)


def candidate_thresholds(scale_min: int, scale_max: int) -> tuple[float, ...]:
    return tuple(v + 0.5 for v in range(scale_min, scale_max))


def _counts_matrix(labels: np.ndarray, classes: np.ndarray) -> np.ndarray:
    return (labels[:, None] == classes[None, :]).sum(axis=0)


def _best_split_with_gain(rows: Sequence[int], m: SurveyMatrix, min_child_size: int = 1,
                          thresholds: Sequence[float] | None = None):
    rows = np.asarray(rows, dtype=np.int64)
    if len(rows) == 0:
        raise ValueError("best_split needs a nonempty row set")
    if thresholds is None or len(thresholds) == 0:
        thresholds = candidate_thresholds(m.scale_min, m.scale_max)
    labels = m.labels[rows]
    classes = np.unique(labels)
    if len(classes) < 2:
        return None, Fraction(0)
    n = len(rows)
    parent_sq = Fraction(int((_counts_matrix(labels, classes) ** 2).sum()), n)

    best = None
    best_score = None
    for attr in m.splitter_indices:
        col = m.scores[rows, attr]
        for thr in sorted(thresholds):
            mask = col <= thr
            n_left = int(mask.sum())
            n_right = n - n_left
            if n_left < max(1, min_child_size) or n_right < max(1, min_child_size):
                continue
            cl = _counts_matrix(labels[mask], classes)
            cr = _counts_matrix(labels[~mask], classes)
            # gain * n = sum_L c^2/n_L + sum_R c^2/n_R - sum_P c^2/n
            score = (Fraction(int((cl ** 2).sum()), n_left)
                     + Fraction(int((cr ** 2).sum()), n_right))
            if best_score is None or score > best_score:
                best_score = score
                best = Split(attr, float(thr))
    if best is None:
        return None, Fraction(0)
    gain = (best_score - parent_sq) / n
    if gain <= 0:
        return None, Fraction(0)
    return best, gain


def best_split(rows: Sequence[int], m: SurveyMatrix, min_child_size: int = 1,
               thresholds: Sequence[float] | None = None) -> Split | None:
    """Exhaustive search for the split with maximal Gini gain.

    Returns None when no candidate produces two nonempty children (each of
    at least ``min_child_size`` rows) or when the best gain is zero.
    """
    return _best_split_with_gain(rows, m, min_child_size, thresholds)[0]


def grow_tree(m: SurveyMatrix, config: GrowthConfig | None = None,
              rows: Sequence[int] | None = None) -> DecisionTree:
    """Grow the saturated tree on ``rows`` (default: every row of ``m``).

    A node stays a leaf when it holds ``min_leaf_size`` rows or fewer, or
    when no admissible split reduces impurity. Node ids are assigned in
    preorder starting at 0.
    """
    config = config or GrowthConfig()
    thresholds = config.thresholds or candidate_thresholds(m.scale_min, m.scale_max)
    config = replace(config, thresholds=tuple(thresholds))
    if rows is None:
        rows = range(m.n_rows)
    rows = sorted(int(r) for r in rows)
    labels = m.labels
    counter = iter(range(1 << 30))

    def _grow(node_rows: list[int]) -> TreeNode:
        node_id = next(counter)
        counts = ClassCounts.from_labels(labels[node_rows])
        split = None
        if len(node_rows) > config.min_leaf_size:
            split = best_split(node_rows, m, config.min_child_size, thresholds)
        if split is None:
            return TreeNode(node_id, counts, tuple(node_rows))
        col = m.scores[:, split.attribute]
        left_rows = [r for r in node_rows if col[r] <= split.threshold]
        right_rows = [r for r in node_rows if col[r] > split.threshold]
        left = _grow(left_rows)
        right = _grow(right_rows)
        return TreeNode(node_id, counts, tuple(node_rows), split, left, right)

    root = _grow(rows)
    class_labels = tuple(int(c) for c in np.unique(labels))
    return DecisionTree(root, m.attribute_names, m.overall_index, class_labels, config)


def predict(t: DecisionTree, respondent_row: Sequence[int]) -> int:
    """Majority class of the leaf the row is routed to (<= goes left)."""
    return t.leaf_for(respondent_row).class_counts.majority()
