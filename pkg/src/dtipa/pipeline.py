"""End-to-end orchestration, configuration and report rendering."""

from __future__ import annotations

import hashlib
import json
import os
from importlib import resources
from dataclasses import asdict, dataclass, fields
from typing import Mapping

from . import __version__
from .ahp import FeasibilityVector, feasibility_vector, read_judgments
from .analysis import IpaResult, attribute_weights, ipa_classify
from .cart import DecisionTree, GrowthConfig, grow_tree
from .plan import ImprovementPlan, build_plan
from .prune import CvCurve, PruneSequence, cross_validate, curve_rows, prune_sequence, select_optimal
from .rules import ClassificationRule, Thresholds, extract_rules
from .survey import SurveyMatrix, ValidationReport, attribute_means, validate_survey

SCHEMA_VERSION = "1.0"
ENV_PREFIX = "DTIPA_"
FORMATS = ("json", "tsv", "text")


class ConfigError(ValueError):
    pass


def report_schema() -> dict:
    """JSON schema that every emitted report validates against."""
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())


@dataclass(frozen=True)
class PipelineConfig:
    overall_column: str = "overall"
    k: int = 10
    seed: int = 0
    min_leaf_size: int = 5
    min_child_size: int = 1
    support: float = 0.006
    population: float = 0.01
    probability: float = 0.6
    tau: float = 0.1
    granularity: float = 0.01
    alpha_threshold: float = 0.7
    alpha_include_overall: bool = True
    prune_error: str = "gini"
    nonzero_weight_mean: bool = False
    normalize_weights: bool = False
    target_class: int | None = None
    output_format: str = "json"

    def __post_init__(self):
        for name in ("support", "population", "probability", "alpha_threshold"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ConfigError(f"{name} must be in (0, 1], got {v}")
        if not 0 <= self.tau <= 1:
            raise ConfigError(f"tau must be in [0, 1], got {self.tau}")
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if self.granularity <= 0:
            raise ConfigError("granularity must be positive")
        if self.min_leaf_size < 1 or self.min_child_size < 1:
            raise ConfigError("leaf sizes must be at least 1")
        if self.prune_error not in ("gini", "misclass"):
            raise ConfigError("prune_error must be 'gini' or 'misclass'")
        if self.output_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")

    @property
    def thresholds(self) -> Thresholds:
        return Thresholds(self.support, self.population, self.probability)

    @property
    def growth(self) -> GrowthConfig:
        return GrowthConfig(self.min_leaf_size, self.min_child_size)

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None, **overrides) -> "PipelineConfig":
        """Defaults, then ``DTIPA_<FIELD>`` environment variables, then ``overrides``."""
        environ = os.environ if environ is None else environ
        values = {}
        for f in fields(cls):
            raw = environ.get(ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            values[f.name] = _coerce(f.name, raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> dict:
        return asdict(self)


_BOOL_FIELDS = {"alpha_include_overall", "nonzero_weight_mean", "normalize_weights"}
_INT_FIELDS = {"k", "seed", "min_leaf_size", "min_child_size", "target_class"}
_FLOAT_FIELDS = {"support", "population", "probability", "tau", "granularity", "alpha_threshold"}


def _coerce(name: str, raw: str):
    try:
        if name in _BOOL_FIELDS:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if name in _INT_FIELDS:
            return int(raw)
        if name in _FLOAT_FIELDS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {ENV_PREFIX}{name.upper()}: {raw!r}") from None
    return raw


@dataclass(frozen=True)
class FitResult:
    saturated: DecisionTree
    sequence: PruneSequence
    curve: CvCurve
    optimal: DecisionTree


def fit(m: SurveyMatrix, config: PipelineConfig) -> FitResult:
    if config.k > m.n_rows:
        raise ConfigError(f"k exceeds N ({config.k} > {m.n_rows})")
    t0 = grow_tree(m, config.growth)
    seq = prune_sequence(t0, config.prune_error)
    curve = cross_validate(m, config.growth, config.k, config.seed, seq, config.prune_error)
    return FitResult(t0, seq, curve, select_optimal(curve, seq))


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read_bytes(source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    with open(source, "rb") as fh:
        return fh.read()


@dataclass
class Report:
    config: PipelineConfig
    validation: ValidationReport
    survey: SurveyMatrix
    tree: DecisionTree
    fit: FitResult | None
    means: dict[str, float]
    weights: dict[str, float]
    ipa: IpaResult
    rules: list[ClassificationRule]
    feasibility: FeasibilityVector | None
    plan: ImprovementPlan | None
    input_digests: dict[str, str]

    def to_dict(self) -> dict:
        m = self.survey
        total_w = sum(self.weights.values())
        tree_summary = {
            "n_leaves": self.tree.n_leaves,
            "n_nodes": len(self.tree.nodes()),
            "depth": self.tree.depth(),
            "cv_error": None,
            "cv_stderr": None,
            "nodes": [{k: v for k, v in n.items() if k != "member_rows"}
                      for n in self.tree.to_dict()["nodes"]],
        }
        curve = []
        if self.fit is not None:
            p = self.fit.curve.point(self.tree.n_leaves)
            tree_summary["cv_error"] = p.mean_error
            tree_summary["cv_stderr"] = p.std_error
            alphas = dict(zip(self.fit.sequence.leaf_counts, self.fit.sequence.alphas))
            curve = [{"leaf_count": lc, "alpha": alphas[lc], "train_error": tr,
                      "cv_mean": mean, "cv_stderr": se}
                     for lc, tr, mean, se in curve_rows(self.fit.curve, self.fit.sequence, m)]
        weights = {"raw": dict(self.weights)}
        if self.config.normalize_weights:
            weights["normalized"] = {a: (w / total_w if total_w else 0.0)
                                     for a, w in self.weights.items()}
        return {
            "schema_version": SCHEMA_VERSION,
            "provenance": {
                "tool_version": __version__,
                "inputs": dict(self.input_digests),
                "config": self.config.to_dict(),
            },
            "validation": self.validation.to_dict(),
            "survey": {"n_rows": m.n_rows, "n_attributes": m.n_attributes,
                       "overall": m.overall_name, "means": dict(self.means)},
            "tree": tree_summary,
            "prune_curve": curve,
            "weights": weights,
            "ipa": self.ipa.to_dict(),
            "rules": [r.to_dict() for r in self.rules],
            "feasibility": self.feasibility.to_dict() if self.feasibility else None,
            "plan": self.plan.to_dict() if self.plan else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def run_pipeline(survey_source, judgments_source, config: PipelineConfig,
                 tree: DecisionTree | None = None) -> Report:
    """Validate, fit (unless ``tree`` is supplied), analyse, and plan."""
    survey_bytes = _read_bytes(survey_source)
    m, validation = validate_survey(survey_bytes, config.overall_column, config.alpha_threshold,
                                    config.alpha_include_overall)
    digests = {"survey_sha256": digest(survey_bytes)}
    fit_result = None
    if tree is None:
        fit_result = fit(m, config)
        tree = fit_result.optimal
    means = attribute_means(m)
    weights = attribute_weights(tree)
    ipa = ipa_classify(means, weights, config.nonzero_weight_mean)
    rules = extract_rules(tree, m, config.thresholds)

    feasibility = plan = None
    if judgments_source is not None:
        judgments_bytes = _read_bytes(judgments_source)
        digests["judgments_sha256"] = digest(judgments_bytes)
        feasibility = feasibility_vector(read_judgments(judgments_bytes))
        plan = build_plan(ipa, feasibility, rules, means, config.tau, config.granularity,
                          config.target_class)
    return Report(config, validation, m, tree, fit_result, means, weights, ipa, rules,
                  feasibility, plan, digests)


# ---------------------------------------------------------------- rendering

PRIORITY_NAMES = {1: "first", 2: "second", 3: "third", 4: "fourth"}


def rules_table(rules: list[ClassificationRule], overall: str) -> list[list[str]]:
    rows = [["id", "if", "then", "S", "Po", "P", "valid"]]
    for r in rules:
        cond = " AND ".join(f"{c.attribute} ({c.relation} {c.threshold:g})" for c in r.conditions)
        rows.append([str(r.rule_id), cond or "(always)", f"{overall} (= {r.conclusion})",
                     f"{r.support:.3f}", f"{r.population:.3f}", f"{r.probability:.3f}",
                     "valid" if r.valid else "invalid"])
    return rows


def plan_table(plan: ImprovementPlan, text: bool = True) -> list[list[str]]:
    rows = [["attribute", "ipa_priority", "dtipa_priority", "magnitude"]]
    for item in plan.items:
        if item.magnitude is None:
            mag = "-" if text else ""
        elif text:
            sign = ">=" if item.direction == "increase" else "reduce by >="
            mag = f"{sign} {item.magnitude:.2f} pts"
        else:
            mag = repr(item.magnitude)
        rows.append([item.attribute, str(item.initial_priority), str(item.final_priority), mag])
    return rows


def ipa_table(ipa: IpaResult) -> list[list[str]]:
    rows = [["attribute", "mean", "weight", "quadrant"]]
    for e in ipa:
        rows.append([e.attribute, repr(e.mean), repr(e.weight), e.quadrant.value])
    return rows


def tsv(rows: list[list[str]]) -> str:
    return "".join("\t".join(r) + "\n" for r in rows)


def _aligned(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in rows)


def plan_text(report: Report) -> str:
    plan = report.plan
    out = []
    if plan is None:
        return "no feasibility judgments supplied; no plan\n"
    f = report.feasibility
    out.append("Improvement feasibility (AHP, CR = %.3f)\n" % f.consistency_ratio)
    for attr, v in f.feasibility.items():
        out.append(f"  {attr}: {v:.2f}\n")
    out.append("\n")
    if plan.unchanged:
        out.append("IPA priorities unchanged.\n")
        for w in plan.warnings:
            out.append(f"note: {w}\n")
    else:
        for adj in plan.adjustments:
            if adj.rule_id is None:
                out.append(f"no valid rule for infeasible attribute {adj.infeasible_attribute}\n")
                continue
            out.append(f"infeasible attribute {adj.infeasible_attribute} handled by rule "
                       f"{adj.rule_id}: per rule {adj.rule_id}, "
                       f"{adj.probability * 100:.1f}% probability that "
                       f"{report.survey.overall_name} = {adj.target_class} once all magnitudes "
                       f"are met\n")
    out.append("\n")
    out.append(_aligned(plan_table(plan, text=True)))
    return "".join(out)


def report_text(report: Report) -> str:
    m = report.survey
    v = report.validation
    out = [f"DT-IPA report (schema {SCHEMA_VERSION})\n", "\n"]
    alpha = "n/a" if v.cronbach_alpha is None else f"{v.cronbach_alpha:.3f}"
    out.append(f"Survey: {v.rows_loaded} rows loaded, {v.rows_rejected} rejected, "
               f"{m.n_attributes} attributes; Cronbach alpha {alpha} "
               f"({'reliable' if v.reliable else 'below threshold'} at {v.alpha_threshold})\n")
    t = report.tree
    line = f"Optimal tree: {t.n_leaves} leaves, {len(t.nodes())} nodes, depth {t.depth()}"
    if report.fit is not None:
        p = report.fit.curve.point(t.n_leaves)
        line += f", CV error {p.mean_error:.4f} (SE {p.std_error:.4f})"
    out.append(line + "\n\n")
    out.append("IPA\n")
    out.append(f"  grand mean {report.ipa.grand_mean:.2f}, mean weight {report.ipa.mean_weight:.4f}\n")
    rows = [["attribute", "mean", "weight", "quadrant"]]
    for e in report.ipa:
        rows.append([e.attribute, f"{e.mean:.2f}", f"{e.weight:.4f}", e.quadrant.value])
    out.append(_aligned(rows))
    out.append("\nRules\n")
    out.append(_aligned(rules_table(report.rules, m.overall_name)))
    out.append("\n")
    out.append(plan_text(report))
    return "".join(out)


def render(report: Report, fmt: str, what: str = "report") -> str:
    if fmt == "json":
        return report.to_json()
    if fmt == "tsv":
        if what == "plan" and report.plan is not None:
            return tsv(plan_table(report.plan, text=False))
        return tsv(rules_table(report.rules, report.survey.overall_name))
    if what == "plan":
        return plan_text(report)
    return report_text(report)
