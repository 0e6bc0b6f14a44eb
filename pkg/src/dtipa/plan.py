"""Feasibility-aware correction of IPA priorities using classification rules.

Priority-1 attributes whose improvement feasibility falls below ``tau`` are
hard to improve in the planning period. For each, a valid rule reaching the
target overall class is sought that mentions the attribute. Within that
rule, attributes that already meet their condition and are infeasible drop
to the lowest priority; feasible attributes that miss their condition move
to priority 1 with the score change needed to meet it.

Rule conditions are compared against attribute *means* here, whereas rule
counting in :mod:`dtipa.rules` tests individual respondent scores.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .ahp import FeasibilityVector
from .analysis import IpaResult, Quadrant
from .rules import GT, ClassificationRule, RuleCondition

log = logging.getLogger(__name__)

LOWEST_PRIORITY = 4


class FeasibilityNotElicitedError(KeyError):
    def __init__(self, attribute: str):
        super().__init__(attribute)
        self.attribute = attribute

    def __str__(self) -> str:
        return f"feasibility not elicited for priority-1 attribute {self.attribute!r}"


class UnneutralizableRuleError(ValueError):
    pass


@dataclass(frozen=True)
class PlanItem:
    attribute: str
    initial_priority: int
    final_priority: int
    magnitude: float | None = None
    direction: str | None = None
    rationale: str = ""

    def to_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "initial_priority": self.initial_priority,
            "final_priority": self.final_priority,
            "magnitude": self.magnitude,
            "direction": self.direction,
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class Adjustment:
    infeasible_attribute: str | None
    rule_id: int | None
    target_class: int
    probability: float | None

    def to_dict(self) -> dict:
        return {"infeasible_attribute": self.infeasible_attribute, "rule_id": self.rule_id,
                "target_class": self.target_class, "probability": self.probability}


@dataclass(frozen=True)
class ImprovementPlan:
    items: tuple[PlanItem, ...]
    target_class: int | None = None
    selected_rule: int | None = None
    probability: float | None = None
    adjustments: tuple[Adjustment, ...] = ()
    warnings: tuple[str, ...] = field(default=())

    def __getitem__(self, attribute: str) -> PlanItem:
        for item in self.items:
            if item.attribute == attribute:
                return item
        raise KeyError(attribute)

    @property
    def unchanged(self) -> bool:
        return all(i.final_priority == i.initial_priority and i.magnitude is None
                   for i in self.items)

    def to_dict(self) -> dict:
        return {
            "selected_rule": self.selected_rule,
            "target_class": self.target_class,
            "probability": self.probability,
            "unchanged": self.unchanged,
            "adjustments": [a.to_dict() for a in self.adjustments],
            "warnings": list(self.warnings),
            "items": [i.to_dict() for i in self.items],
        }


def infeasible_attributes(ipa: IpaResult, f: FeasibilityVector | Mapping[str, float],
                          tau: float = 0.1) -> list[str]:
    """Priority-1 attributes with feasibility below ``tau``, in IPA order."""
    out = []
    for attr in ipa.in_quadrant(Quadrant.PRIORITY_IMPROVE):
        if attr not in f:
            raise FeasibilityNotElicitedError(attr)
        if f[attr] < tau:
            out.append(attr)
    return out


def mean_satisfies(c: RuleCondition, mean: float) -> bool:
    return c.holds(mean)


def find_adjustment_rule(rules: Iterable[ClassificationRule], infeasible: str,
                         means: Mapping[str, float],
                         target_class: int) -> ClassificationRule | None:
    """Best valid rule that involves ``infeasible`` and leaves something to improve.

    Candidates conclude ``target_class`` and have at least one condition on
    another attribute that the current mean does not satisfy. Ranked by
    probability, then support, then lowest rule id.
    """
    candidates = []
    for rule in rules:
        if not rule.valid or rule.conclusion != target_class:
            continue
        if not rule.conditions_on(infeasible):
            continue
        if not any(c.attribute != infeasible and not mean_satisfies(c, means[c.attribute])
                   for c in rule.conditions):
            continue
        candidates.append(rule)
    if not candidates:
        return None
    return min(candidates, key=lambda r: (-r.probability, -r.support, r.rule_id))


def _round_up(value: float, granularity: float) -> float:
    steps = math.ceil(value / granularity - 1e-9)
    return round(max(steps, 1) * granularity, 12)


def improvement_magnitude(c: RuleCondition, mean: float, granularity: float = 0.01) -> float:
    """Score change that brings ``mean`` to the rule's requirement.

    For '> k' this is k - mean (or one granularity step when the mean sits
    exactly on k); for '<= k' it is the reduction mean - k plus one step.
    Rounded up to a multiple of ``granularity``.
    """
    if c.relation == GT:
        raw = c.threshold - mean
        if raw <= 0:
            raw = granularity
    else:
        raw = mean - c.threshold + granularity
    return _round_up(raw, granularity)


def adjust_priorities(ipa: IpaResult, f: FeasibilityVector | Mapping[str, float],
                      rule: ClassificationRule, means: Mapping[str, float],
                      granularity: float = 0.01, tau: float = 0.1) -> ImprovementPlan:
    """Apply one rule to the IPA priorities."""
    infeasible = infeasible_attributes(ipa, f, tau)
    involved = [a for a in infeasible if rule.conditions_on(a)]
    return _apply_rules(ipa, [(involved[0] if involved else None, rule)], means, granularity,
                        set(infeasible), rule.conclusion)


def _apply_rules(ipa: IpaResult, selections: Sequence[tuple[str | None, ClassificationRule | None]],
                 means: Mapping[str, float], granularity: float, infeasible: set[str],
                 target_class: int | None, warnings: Sequence[str] = ()) -> ImprovementPlan:
    final = ipa.priorities()
    magnitude: dict[str, float] = {}
    direction: dict[str, str] = {}
    rationale: dict[str, str] = {}
    promoted: set[str] = set()
    adjustments = []
    for infeasible_attr, rule in selections:
        if rule is None:
            adjustments.append(Adjustment(infeasible_attr, None, target_class, None))
            continue
        adjustments.append(Adjustment(infeasible_attr, rule.rule_id, rule.conclusion,
                                      rule.probability))
        for attr in rule.attributes():
            if attr not in final:
                raise KeyError(f"rule attribute {attr!r} missing from IPA result")
            unmet = [c for c in rule.conditions_on(attr) if not mean_satisfies(c, means[attr])]
            if attr in infeasible:
                if unmet:
                    raise UnneutralizableRuleError(
                        f"selected rule cannot neutralize infeasible attribute {attr!r}")
                if attr not in promoted:
                    final[attr] = LOWEST_PRIORITY
                    rationale[attr] = f"rule {rule.rule_id}: condition already met, infeasible"
            elif unmet:
                c = unmet[0]
                delta = improvement_magnitude(c, means[attr], granularity)
                final[attr] = 1
                magnitude[attr] = max(delta, magnitude.get(attr, 0.0))
                direction[attr] = "increase" if c.relation == GT else "decrease"
                rationale[attr] = f"rule {rule.rule_id}: {c} not met by mean {means[attr]:.2f}"
                promoted.add(attr)
    items = tuple(
        PlanItem(e.attribute, e.initial_priority, final[e.attribute],
                 magnitude.get(e.attribute), direction.get(e.attribute),
                 rationale.get(e.attribute, ""))
        for e in ipa
    )
    used = [a for a in adjustments if a.rule_id is not None]
    return ImprovementPlan(
        items=items,
        target_class=target_class,
        selected_rule=used[0].rule_id if used else None,
        probability=used[0].probability if used else None,
        adjustments=tuple(adjustments),
        warnings=tuple(warnings),
    )


def build_plan(ipa: IpaResult, f: FeasibilityVector | Mapping[str, float],
               rules: Sequence[ClassificationRule], means: Mapping[str, float],
               tau: float = 0.1, granularity: float = 0.01,
               target_class: int | None = None) -> ImprovementPlan:
    """Full adjustment over every infeasible priority-1 attribute.

    Infeasible attributes are handled in descending weight order, one rule
    each. An attribute promoted to priority 1 by an earlier rule is never
    demoted by a later one.
    """
    if target_class is None:
        target_class = max(r.conclusion for r in rules) if rules else None
    infeasible = infeasible_attributes(ipa, f, tau)
    infeasible.sort(key=lambda a: (-ipa[a].weight, a))
    selections = []
    warnings = []
    for attr in infeasible:
        rule = find_adjustment_rule(rules, attr, means, target_class)
        if rule is None:
            msg = f"no valid rule involves {attr!r}; IPA priorities kept for it"
            log.warning(msg)
            warnings.append(msg)
        selections.append((attr, rule))
    if not infeasible:
        warnings.append("no infeasible priority-1 attribute; IPA priorities unchanged")
    return _apply_rules(ipa, selections, means, granularity, set(infeasible), target_class,
                        warnings)
