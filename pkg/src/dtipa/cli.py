"""Command-line front end: every pipeline stage runnable on its own."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .ahp import ConvergenceError, InconsistentJudgmentsError, feasibility_vector, read_judgments
from .analysis import attribute_weights, ipa_classify
from .cart import DecisionTree
from .pipeline import (ConfigError, PipelineConfig, fit, ipa_table, render, rules_table,
                       run_pipeline, tsv)
from .plan import FeasibilityNotElicitedError, UnneutralizableRuleError
from .prune import curve_tsv
from .rules import extract_rules
from .survey import SurveyError, attribute_means, validate_survey
from .synth import DEFAULT_SEED, JUDGMENTS_CSV, synth_survey

log = logging.getLogger("dtipa")


def _config_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline configuration (env DTIPA_<NAME> also honoured)")
    g.add_argument("--overall", dest="overall_column", help="label of the class column")
    g.add_argument("--k", type=int, help="cross-validation folds (default 10)")
    g.add_argument("--seed", type=int, help="fold shuffling seed (default 0)")
    g.add_argument("--min-leaf-size", type=int)
    g.add_argument("--min-child-size", type=int)
    g.add_argument("--support", type=float)
    g.add_argument("--population", type=float)
    g.add_argument("--probability", type=float)
    g.add_argument("--tau", type=float, help="feasibility cutoff (default 0.1)")
    g.add_argument("--granularity", type=float, help="magnitude rounding step (default 0.01)")
    g.add_argument("--alpha-threshold", type=float)
    g.add_argument("--alpha-exclude-overall", action="store_true", default=None,
                   help="compute Cronbach alpha over splitter columns only")
    g.add_argument("--prune-error", choices=("gini", "misclass"))
    g.add_argument("--nonzero-weight-mean", action="store_true", default=None,
                   help="IPA weight boundary over attributes the tree actually uses")
    g.add_argument("--normalize-weights", action="store_true", default=None)
    g.add_argument("--target-class", type=int)
    g.add_argument("--format", dest="output_format", choices=("json", "tsv", "text"))
    p.add_argument("-o", "--output", help="write to this file instead of stdout")


def _config(args) -> PipelineConfig:
    keys = ("overall_column", "k", "seed", "min_leaf_size", "min_child_size", "support",
            "population", "probability", "tau", "granularity", "alpha_threshold",
            "prune_error", "nonzero_weight_mean", "normalize_weights", "target_class",
            "output_format")
    overrides = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "alpha_exclude_overall", None):
        overrides["alpha_include_overall"] = False
    return PipelineConfig.from_env(**overrides)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_tree(path: str | None) -> DecisionTree | None:
    if not path:
        return None
    return DecisionTree.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _tree_and_matrix(args, cfg):
    m, _ = validate_survey(args.survey, cfg.overall_column, cfg.alpha_threshold,
                           cfg.alpha_include_overall)
    tree = _load_tree(args.tree)
    if tree is None:
        tree = fit(m, cfg).optimal
    return m, tree


def cmd_validate(args, cfg):
    _, report = validate_survey(args.survey, cfg.overall_column, cfg.alpha_threshold,
                                cfg.alpha_include_overall)
    if cfg.output_format == "json":
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.output)
    else:
        lines = [f"rows_loaded\t{report.rows_loaded}", f"rows_rejected\t{report.rows_rejected}",
                 f"duplicate_rows\t{report.duplicate_rows}",
                 f"cronbach_alpha\t{report.cronbach_alpha!r}", f"reliable\t{report.reliable}"]
        lines += [f"rejected\t{r.line}\t{r.reason}" for r in report.rejected]
        _emit("\n".join(lines) + "\n", args.output)
    if not report.reliable:
        log.warning("Cronbach alpha below %s", cfg.alpha_threshold)


def cmd_fit(args, cfg):
    m, _ = validate_survey(args.survey, cfg.overall_column, cfg.alpha_threshold,
                           cfg.alpha_include_overall)
    result = fit(m, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tree.json").write_text(json.dumps(result.optimal.to_dict(), indent=2) + "\n",
                                   encoding="utf-8")
    (out / "prune_curve.tsv").write_text(curve_tsv(result.curve, result.sequence, m),
                                         encoding="utf-8")
    print(f"optimal tree: {result.optimal.n_leaves} leaves -> {out / 'tree.json'}")


def cmd_prune_curve(args, cfg):
    m, _ = validate_survey(args.survey, cfg.overall_column, cfg.alpha_threshold,
                           cfg.alpha_include_overall)
    result = fit(m, cfg)
    _emit(curve_tsv(result.curve, result.sequence, m), args.output)


def cmd_ipa(args, cfg):
    m, tree = _tree_and_matrix(args, cfg)
    means = attribute_means(m)
    ipa = ipa_classify(means, attribute_weights(tree), cfg.nonzero_weight_mean)
    if cfg.output_format == "json":
        _emit(json.dumps(ipa.to_dict(), indent=2) + "\n", args.output)
    else:
        ref = f"# grand_mean\t{ipa.grand_mean!r}\n# mean_weight\t{ipa.mean_weight!r}\n"
        _emit(ref + tsv(ipa_table(ipa)), args.output)


def cmd_rules(args, cfg):
    m, tree = _tree_and_matrix(args, cfg)
    rules = extract_rules(tree, m, cfg.thresholds)
    if cfg.output_format == "json":
        _emit(json.dumps([r.to_dict() for r in rules], indent=2) + "\n", args.output)
    else:
        _emit(tsv(rules_table(rules, m.overall_name)), args.output)


def cmd_ahp(args, cfg):
    f = feasibility_vector(read_judgments(args.judgments))
    if cfg.output_format == "json":
        _emit(json.dumps(f.to_dict(), indent=2) + "\n", args.output)
    else:
        lines = [f"{a}\t{v!r}" for a, v in f.feasibility.items()]
        lines += [f"# lambda_max\t{f.lambda_max!r}", f"# CR\t{f.consistency_ratio!r}"]
        _emit("\n".join(lines) + "\n", args.output)


def _run(args, cfg, what):
    report = run_pipeline(args.survey, args.judgments, cfg, _load_tree(args.tree))
    if not report.validation.reliable:
        log.warning("Cronbach alpha below %s", cfg.alpha_threshold)
    _emit(render(report, cfg.output_format, what), args.output)


def cmd_plan(args, cfg):
    _run(args, cfg, "plan")


def cmd_report(args, cfg):
    _run(args, cfg, "report")


def cmd_synth(args, cfg):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "survey.csv").write_text(synth_survey(args.synth_seed).to_csv(), encoding="utf-8")
    (out / "judgments.csv").write_text(JUDGMENTS_CSV, encoding="utf-8")
    print(f"wrote {out / 'survey.csv'} and {out / 'judgments.csv'}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dtipa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, survey=True, judgments=False, tree=False):
        p = sub.add_parser(name, help=help_)
        if survey:
            p.add_argument("survey", help="survey CSV")
        if judgments:
            p.add_argument("judgments", help="pairwise judgment CSV (i,j,value)")
        if tree:
            p.add_argument("--tree", help="reuse a tree JSON written by 'fit'")
        _config_args(p)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "load a survey and report rejects and Cronbach alpha")
    add("fit", cmd_fit, "grow, prune and select a tree").add_argument(
        "--out-dir", default=".", help="where tree.json and prune_curve.tsv go")
    add("prune-curve", cmd_prune_curve, "CV error for every tree size (TSV)")
    add("ipa", cmd_ipa, "importance-performance quadrants", tree=True)
    add("rules", cmd_rules, "if-then rules with S/Po/P", tree=True)
    add("ahp", cmd_ahp, "feasibility vector from pairwise judgments", survey=False,
        judgments=True)
    add("plan", cmd_plan, "feasibility-aware improvement plan", judgments=True, tree=True)
    add("report", cmd_report, "full report", judgments=True, tree=True)
    p = add("synth", cmd_synth, "write the synthetic 107x18 fixture", survey=False)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--synth-seed", type=int, default=DEFAULT_SEED)
    return parser


EXPECTED_ERRORS = (SurveyError, ConfigError, InconsistentJudgmentsError, ConvergenceError,
                   FeasibilityNotElicitedError, UnneutralizableRuleError, ValueError, OSError,
                   KeyError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = _config(args)
        args.func(args, cfg)
    except InconsistentJudgmentsError as e:
        print(f"dtipa: {e}", file=sys.stderr)
        return 3
    except FeasibilityNotElicitedError as e:
        print(f"dtipa: {e}", file=sys.stderr)
        return 4
    except EXPECTED_ERRORS as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"dtipa: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
