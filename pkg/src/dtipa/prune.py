"""Cost-complexity pruning, k-fold cross-validation and 1-SE tree selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cart import ClassCounts, DecisionTree, GrowthConfig, TreeNode, gini, grow_tree
from .survey import SurveyMatrix

log = logging.getLogger(__name__)

ERROR_MEASURES = ("gini", "misclass")


def misclassification_error(t: DecisionTree, rows: Sequence[int], m: SurveyMatrix) -> float:
    """Leaf-size-weighted sum of leaf Gini impurities over ``rows``.

    Rows are routed through ``t`` and the class counts of each leaf are
    recomputed from them, so held-out rows can be scored as well.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("misclassification_error needs at least one row")
    reached: dict[int, list[int]] = {}
    for r in rows:
        leaf = t.leaf_for(m.scores[r])
        reached.setdefault(leaf.node_id, []).append(int(m.labels[r]))
    n = len(rows)
    return sum(len(lab) / n * gini(ClassCounts.from_labels(lab)) for lab in reached.values())


def _node_cost(node: TreeNode, n_root: int, error: str) -> Fraction:
    counts = node.class_counts
    if error == "gini":
        return Fraction(node.n * node.n - sum(v * v for v in counts.counts.values()),
                        node.n * n_root)
    if error == "misclass":
        return Fraction(node.n - max(counts.counts.values()), n_root)
    raise ValueError(f"unknown error measure {error!r}")


def link_strengths(t: DecisionTree, error: str = "gini") -> dict[int, tuple[Fraction, int]]:
    """g(t) and subtree leaf count for every internal node, keyed by node id."""
    n_root = t.root.n
    out = {}
    for node in t.internal_nodes():
        leaves = node.leaves()
        subtree_cost = sum((_node_cost(leaf, n_root, error) for leaf in leaves), Fraction(0))
        g = (_node_cost(node, n_root, error) - subtree_cost) / (len(leaves) - 1)
        out[node.node_id] = (g, len(leaves))
    return out


def weakest_link(t: DecisionTree, error: str = "gini") -> tuple[int, float]:
    """Internal node with minimal g(t).

    Ties prefer the larger subtree (more leaves), then the lowest node id.
    """
    strengths = link_strengths(t, error)
    if not strengths:
        raise ValueError("nothing to prune")
    node_id = min(strengths, key=lambda nid: (strengths[nid][0], -strengths[nid][1], nid))
    return node_id, float(strengths[node_id][0])


@dataclass(frozen=True)
class PruneSequence:
    trees: tuple[DecisionTree, ...]
    alphas: tuple[float, ...]
    pruned_nodes: tuple[int, ...] = ()

    @property
    def leaf_counts(self) -> list[int]:
        return [t.n_leaves for t in self.trees]

    def tree_with_leaves(self, leaf_count: int) -> DecisionTree:
        """Largest tree in the sequence with at most ``leaf_count`` leaves."""
        for t in self.trees:
            if t.n_leaves <= leaf_count:
                return t
        return self.trees[-1]


def prune_sequence(t0: DecisionTree, error: str = "gini") -> PruneSequence:
    """Collapse weakest links until only the root remains."""
    trees = [t0]
    alphas = [0.0]
    pruned = []
    current = t0
    while not current.root.is_leaf:
        node_id, alpha = weakest_link(current, error)
        current = current.collapse(node_id)
        trees.append(current)
        alphas.append(alpha)
        pruned.append(node_id)
    return PruneSequence(tuple(trees), tuple(alphas), tuple(pruned))


def stratified_folds(labels: Sequence[int], k: int, seed: int = 0) -> list[np.ndarray]:
    """Class-stratified fold assignment.

    Rows of each class (in ascending class order) are shuffled and dealt
    round-robin, continuing the deal across classes, so fold sizes differ
    by at most one.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"k exceeds N ({k} > {n})")
    rng = np.random.default_rng(seed)
    order = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        order.extend(rng.permutation(idx).tolist())
    assignment = np.empty(n, dtype=np.int64)
    for pos, row in enumerate(order):
        assignment[row] = pos % k
    return [np.flatnonzero(assignment == f) for f in range(k)]


@dataclass(frozen=True)
class CvPoint:
    leaf_count: int
    mean_error: float
    std_error: float
    fold_errors: tuple[float, ...] = ()


@dataclass(frozen=True)
class CvCurve:
    points: tuple[CvPoint, ...]
    k: int
    fold_seed: int
    folds: tuple[tuple[int, ...], ...] = field(default=(), compare=False)

    def point(self, leaf_count: int) -> CvPoint:
        for p in self.points:
            if p.leaf_count == leaf_count:
                return p
        raise KeyError(leaf_count)


def cross_validate(m: SurveyMatrix, config: GrowthConfig | None = None, k: int = 10,
                   seed: int = 0, full_sequence: PruneSequence | None = None,
                   error: str = "gini") -> CvCurve:
    """k-fold CV error for every tree size of the full-data prune sequence.

    Each fold grows its own saturated tree on the other k-1 folds and prunes
    it. A fold lacking a given leaf count contributes the error of its
    largest tree with no more leaves than that.
    """
    config = config or GrowthConfig()
    n = m.n_rows
    if k > n:
        raise ValueError(f"k exceeds N ({k} > {n})")
    labels = m.labels
    for c, cnt in zip(*np.unique(labels, return_counts=True)):
        if cnt < k:
            log.warning("class %s has %d members, fewer than k=%d folds", c, cnt, k)
    if full_sequence is None:
        full_sequence = prune_sequence(grow_tree(m, config), error)
    sizes = full_sequence.leaf_counts

    folds = stratified_folds(labels, k, seed)
    per_fold: list[list[float]] = []
    for f, test in enumerate(folds):
        train = np.concatenate([folds[g] for g in range(k) if g != f])
        seq = prune_sequence(grow_tree(m, config, rows=train), error)
        by_size = {t.n_leaves: misclassification_error(t, test, m) for t in seq.trees}
        per_fold.append([by_size[seq.tree_with_leaves(s).n_leaves] for s in sizes])

    errors = np.array(per_fold)
    points = []
    for j, s in enumerate(sizes):
        col = errors[:, j]
        se = float(col.std(ddof=1) / math.sqrt(k))
        points.append(CvPoint(s, float(col.mean()), se, tuple(float(e) for e in col)))
    return CvCurve(tuple(points), k, seed, tuple(tuple(int(r) for r in f) for f in folds))


def select_optimal(curve: CvCurve, full_sequence: PruneSequence) -> DecisionTree:
    """Smallest tree whose CV error is within one standard error of the minimum."""
    if not curve.points:
        raise ValueError("empty CV curve")
    best = min(curve.points, key=lambda p: (p.mean_error, p.leaf_count))
    limit = best.mean_error + best.std_error
    chosen = min(p.leaf_count for p in curve.points if p.mean_error <= limit)
    return full_sequence.tree_with_leaves(chosen)


def curve_rows(curve: CvCurve, sequence: PruneSequence, m: SurveyMatrix) -> list[tuple]:
    rows = range(m.n_rows)
    out = []
    for t in sequence.trees:
        p = curve.point(t.n_leaves)
        out.append((t.n_leaves, misclassification_error(t, rows, m), p.mean_error, p.std_error))
    return out


def curve_tsv(curve: CvCurve, sequence: PruneSequence, m: SurveyMatrix) -> str:
    """Prune-curve table: leaf_count, train_error, cv_mean, cv_stderr."""
    lines = ["leaf_count\ttrain_error\tcv_mean\tcv_stderr"]
    for leaves, train, mean, se in curve_rows(curve, sequence, m):
        lines.append(f"{leaves}\t{train:.12f}\t{mean:.12f}\t{se:.12f}")
    return "\n".join(lines) + "\n"
