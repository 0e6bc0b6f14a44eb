"""If-then rules read off root-to-leaf paths, with support/population/probability."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .cart import DecisionTree, TreeNode
from .survey import SurveyMatrix

LE = "<="
GT = ">"


@dataclass(frozen=True)
class RuleCondition:
    attribute: str
    relation: str
    threshold: float

    def holds(self, value: float) -> bool:
        """Strict comparison: a value equal to a '>' threshold does not hold."""
        if self.relation == GT:
            return value > self.threshold
        return value <= self.threshold

    def __str__(self) -> str:
        return f"{self.attribute} {self.relation} {self.threshold:g}"


@dataclass(frozen=True)
class Thresholds:
    support: float = 0.006
    population: float = 0.01
    probability: float = 0.6

    def accepts(self, s: float, po: float, p: float) -> bool:
        return s >= self.support and po >= self.population and p >= self.probability


@dataclass(frozen=True)
class ClassificationRule:
    rule_id: int
    conditions: tuple[RuleCondition, ...]
    conclusion: int
    matched_count: int
    condition_count: int
    total_count: int
    valid: bool = True

    @property
    def support(self) -> float:
        return self.matched_count / self.total_count

    @property
    def population(self) -> float:
        return self.condition_count / self.total_count

    @property
    def probability(self) -> float:
        return self.matched_count / self.condition_count if self.condition_count else 0.0

    def attributes(self) -> list[str]:
        seen = []
        for c in self.conditions:
            if c.attribute not in seen:
                seen.append(c.attribute)
        return seen

    def conditions_on(self, attribute: str) -> list[RuleCondition]:
        return [c for c in self.conditions if c.attribute == attribute]

    def text(self, overall_name: str = "overall") -> str:
        cond = " AND ".join(str(c) for c in self.conditions) or "(always)"
        return f"IF {cond} THEN {overall_name} = {self.conclusion}"

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "conditions": [{"attribute": c.attribute, "relation": c.relation,
                            "threshold": c.threshold} for c in self.conditions],
            "conclusion": self.conclusion,
            "matched_count": self.matched_count,
            "condition_count": self.condition_count,
            "total_count": self.total_count,
            "support": self.support,
            "population": self.population,
            "probability": self.probability,
            "valid": self.valid,
        }


def rule_from_counts(rule_id: int, conditions: Sequence[RuleCondition], conclusion: int,
                     matched: int, condition: int, total: int,
                     thresholds: Thresholds | None = None) -> ClassificationRule:
    thresholds = thresholds or Thresholds()
    rule = ClassificationRule(rule_id, tuple(conditions), conclusion, matched, condition, total)
    return replace(rule, valid=thresholds.accepts(rule.support, rule.population, rule.probability))


def merge_conditions(path: Iterable[RuleCondition]) -> tuple[RuleCondition, ...]:
    """Keep the tightest '<=' and '>' bound per attribute, in first-seen order."""
    upper: dict[str, float] = {}
    lower: dict[str, float] = {}
    order: list[tuple[str, str]] = []
    for c in path:
        key = (c.attribute, c.relation)
        if c.relation == LE:
            upper[c.attribute] = min(upper.get(c.attribute, c.threshold), c.threshold)
        else:
            lower[c.attribute] = max(lower.get(c.attribute, c.threshold), c.threshold)
        if key not in order:
            order.append(key)
    return tuple(RuleCondition(a, r, upper[a] if r == LE else lower[a]) for a, r in order)


def leaf_paths(t: DecisionTree) -> list[tuple[TreeNode, list[RuleCondition]]]:
    out = []

    def _walk(node: TreeNode, path: list[RuleCondition]):
        if node.is_leaf:
            out.append((node, path))
            return
        name = t.attribute_names[node.split.attribute]
        _walk(node.left, path + [RuleCondition(name, LE, node.split.threshold)])
        _walk(node.right, path + [RuleCondition(name, GT, node.split.threshold)])

    _walk(t.root, [])
    return out


def satisfying_rows(conditions: Sequence[RuleCondition], m: SurveyMatrix) -> np.ndarray:
    mask = np.ones(m.n_rows, dtype=bool)
    for c in conditions:
        col = m.scores[:, m.index_of(c.attribute)]
        mask &= (col > c.threshold) if c.relation == GT else (col <= c.threshold)
    return mask


def extract_rules(t: DecisionTree, m: SurveyMatrix,
                  thresholds: Thresholds | None = None) -> list[ClassificationRule]:
    """One rule per leaf, counted against every respondent row of ``m``."""
    rules = []
    labels = m.labels
    for leaf, path in leaf_paths(t):
        conditions = merge_conditions(path)
        conclusion = leaf.class_counts.majority()
        mask = satisfying_rows(conditions, m)
        condition_count = int(mask.sum())
        matched = int((labels[mask] == conclusion).sum())
        rules.append(rule_from_counts(leaf.node_id, conditions, conclusion, matched,
                                      condition_count, m.n_rows, thresholds))
    return rules


def filter_valid(rules: Iterable[ClassificationRule],
                 thresholds: Thresholds | None = None) -> list[ClassificationRule]:
    thresholds = thresholds or Thresholds()
    return [r for r in rules if thresholds.accepts(r.support, r.population, r.probability)]
