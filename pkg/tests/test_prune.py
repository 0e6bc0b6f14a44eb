import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtipa.cart import GrowthConfig, grow_tree
from dtipa.prune import (CvCurve, CvPoint, cross_validate, curve_tsv, misclassification_error,
                         prune_sequence, select_optimal, stratified_folds, weakest_link)
from dtipa.survey import SurveyMatrix

from oracles import gini_pairwise, leaf_weighted_gini, random_survey


def _stump_matrix():
    rows = [[1, 3]] * 6 + [[1, 4]] * 2 + [[5, 4]] * 7 + [[5, 3]] * 1
    return SurveyMatrix(("a", "overall"), 1, np.array(rows))


def test_error_root_only_is_gini():
    m = _stump_matrix()
    t = grow_tree(m, GrowthConfig(min_leaf_size=100))
    assert misclassification_error(t, range(m.n_rows), m) == pytest.approx(
        gini_pairwise(m.labels.tolist()), abs=1e-12)


def test_error_pure_leaves_zero():
    m = SurveyMatrix(("a", "overall"), 1, np.array([[1, 3]] * 6 + [[5, 4]] * 6))
    assert misclassification_error(grow_tree(m), range(12), m) == 0.0


def test_error_matches_two_pass_oracle(fixture_matrix):
    t = grow_tree(fixture_matrix)
    rows = list(range(0, fixture_matrix.n_rows, 3))
    assert misclassification_error(t, rows, fixture_matrix) == pytest.approx(
        leaf_weighted_gini(t, rows, fixture_matrix), abs=1e-12)


def test_error_empty_rows():
    m = _stump_matrix()
    with pytest.raises(ValueError):
        misclassification_error(grow_tree(m), [], m)


def test_stump_weakest_link():
    m = _stump_matrix()
    t = grow_tree(m)
    assert t.n_leaves == 2
    node_id, alpha = weakest_link(t)
    n = m.n_rows
    c_root = gini_pairwise(m.labels.tolist())
    c_stump = sum(leaf.n / n * gini_pairwise([int(x) for x in m.labels[list(leaf.member_rows)]])
                  for leaf in t.leaves())
    assert node_id == 0
    assert alpha == pytest.approx((c_root - c_stump) / (2 - 1), abs=1e-12)


def test_nothing_to_prune():
    m = _stump_matrix()
    with pytest.raises(ValueError, match="nothing to prune"):
        weakest_link(grow_tree(m, GrowthConfig(min_leaf_size=100)))


def test_tie_prefers_larger_subtree():
    # two symmetric halves, each split once more; the root and the two children
    # are arranged so that root g equals the child g
    rows = []
    for a, b, y in [(1, 1, 1), (1, 5, 2), (5, 1, 3), (5, 5, 4)]:
        rows += [[a, b, y]] * 6
    m = SurveyMatrix(("a", "b", "overall"), 2, np.array(rows))
    t = grow_tree(m)
    # all pure leaves: every internal node's g is equal (0.5 per removed leaf level)
    from dtipa.prune import link_strengths
    strengths = link_strengths(t)
    assert len({g for g, _ in strengths.values()}) == 1
    node_id, _ = weakest_link(t)
    assert node_id == 0  # the root has the most leaves


def _brute_force_g(t, m):
    n = t.root.n
    out = {}
    for node in t.internal_nodes():
        labels = [int(x) for x in m.labels[list(node.member_rows)]]
        r_node = len(labels) / n * gini_pairwise(labels)
        r_sub = sum(leaf.n / n * gini_pairwise([int(x) for x in m.labels[list(leaf.member_rows)]])
                    for leaf in node.leaves())
        out[node.node_id] = (r_node - r_sub) / (len(node.leaves()) - 1)
    return out


def test_weakest_link_matches_brute_force(fixture_matrix):
    t = grow_tree(fixture_matrix)
    g = _brute_force_g(t, fixture_matrix)
    node_id, alpha = weakest_link(t)
    assert alpha == pytest.approx(min(g.values()), abs=1e-12)
    assert g[node_id] == pytest.approx(alpha, abs=1e-12)


def test_sequence_root_only_and_stump():
    m = _stump_matrix()
    seq = prune_sequence(grow_tree(m, GrowthConfig(min_leaf_size=100)))
    assert len(seq.trees) == 1 and seq.alphas == (0.0,)
    seq = prune_sequence(grow_tree(m))
    assert seq.leaf_counts == [2, 1]
    assert seq.alphas[1] > 0


def test_fixture_sequence_alphas_recomputed(fixture_matrix):
    seq = prune_sequence(grow_tree(fixture_matrix))
    for before, alpha in zip(seq.trees, seq.alphas[1:]):
        assert alpha == pytest.approx(min(_brute_force_g(before, fixture_matrix).values()), abs=1e-12)
    assert list(seq.alphas) == sorted(seq.alphas)
    assert seq.trees[-1].n_leaves == 1


def test_folds_on_107():
    labels = np.array([3] * 16 + [4] * 56 + [5] * 35)
    folds = stratified_folds(labels, 10, 0)
    sizes = sorted(len(f) for f in folds)
    assert set(sizes) <= {10, 11}
    assert sorted(np.concatenate(folds).tolist()) == list(range(107))


def test_folds_errors():
    with pytest.raises(ValueError, match="k exceeds N"):
        stratified_folds([1, 2, 3], 4)
    with pytest.raises(ValueError):
        stratified_folds([1, 2, 3], 1)


def test_small_class_warns(caplog):
    m = random_survey(np.random.default_rng(0), 30, 4)
    scores = np.array(m.scores)
    scores[0, -1] = 1
    m = SurveyMatrix(m.attribute_names, m.overall_index, scores)
    with caplog.at_level("WARNING"):
        cross_validate(m, k=5)
    assert "fewer than k" in caplog.text


def test_separable_cv_zero():
    m = SurveyMatrix(("a", "b", "overall"), 2,
                     np.array([[1, (i % 5) + 1, 3] for i in range(20)] +
                              [[5, (i % 5) + 1, 5] for i in range(20)]))
    curve = cross_validate(m, k=5)
    assert curve.point(2).mean_error == pytest.approx(0.0, abs=1e-12)


def test_cv_mean_se_from_fold_errors(fixture_matrix):
    curve = cross_validate(fixture_matrix, k=10, seed=0)
    for p in curve.points:
        errs = np.array(p.fold_errors)
        assert len(errs) == 10
        assert p.mean_error == pytest.approx(errs.mean(), abs=1e-12)
        assert p.std_error == pytest.approx(errs.std(ddof=1) / math.sqrt(10), abs=1e-12)


def test_curve_rows_count_distinct_leaf_counts(fixture_matrix):
    seq = prune_sequence(grow_tree(fixture_matrix))
    curve = cross_validate(fixture_matrix, full_sequence=seq)
    body = curve_tsv(curve, seq, fixture_matrix).splitlines()[1:]
    assert len(body) == len(set(seq.leaf_counts))


def _fake_sequence(fixture_matrix):
    return prune_sequence(grow_tree(fixture_matrix))


def test_select_unique_min(fixture_matrix):
    seq = _fake_sequence(fixture_matrix)
    sizes = seq.leaf_counts
    pts = [CvPoint(s, 0.5 if s != sizes[1] else 0.1, 0.01) for s in sizes]
    t = select_optimal(CvCurve(tuple(pts), 10, 0), seq)
    assert t.n_leaves == sizes[1]


def test_select_flat_curve_smallest(fixture_matrix):
    seq = _fake_sequence(fixture_matrix)
    pts = [CvPoint(s, 0.3, 0.0) for s in seq.leaf_counts]
    assert select_optimal(CvCurve(tuple(pts), 10, 0), seq).n_leaves == 1


def test_fixture_selects_six_leaves(fixture_matrix):
    seq = _fake_sequence(fixture_matrix)
    curve = cross_validate(fixture_matrix, full_sequence=seq)
    assert select_optimal(curve, seq).n_leaves == 6


def test_misclass_measure_runs(fixture_matrix):
    seq = prune_sequence(grow_tree(fixture_matrix), error="misclass")
    assert list(seq.alphas) == sorted(seq.alphas)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_sequence_properties(seed):
    m = random_survey(np.random.default_rng(seed), 40, 5)
    seq = prune_sequence(grow_tree(m))
    counts = seq.leaf_counts
    assert all(a > b for a, b in zip(counts, counts[1:]))
    assert list(seq.alphas) == sorted(seq.alphas)
    for big, small in zip(seq.trees, seq.trees[1:]):
        assert small.node_ids() < big.node_ids()
    train = [misclassification_error(t, range(m.n_rows), m) for t in seq.trees]
    assert all(a <= b + 1e-12 for a, b in zip(train, train[1:]))
    curve = cross_validate(m, k=5, full_sequence=seq)
    best = min(curve.points, key=lambda p: (p.mean_error, p.leaf_count))
    assert select_optimal(curve, seq).n_leaves <= best.leaf_count
