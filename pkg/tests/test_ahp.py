import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtipa.ahp import (InconsistentJudgmentsError, JudgmentMatrix, consistency_ratio,
                       feasibility_vector, parse_ratio, principal_eigenvector, read_judgments)
from dtipa.synth import JUDGMENTS_CSV

from oracles import charpoly_root, dense_eigenpair


def test_all_ones():
    j = JudgmentMatrix(("a", "b", "c"), np.ones((3, 3)))
    lam, v = principal_eigenvector(j)
    assert lam == pytest.approx(3.0, abs=1e-9)
    assert v == pytest.approx([1 / 3] * 3, abs=1e-9)


def test_931():
    j = JudgmentMatrix.from_weights(("a", "b", "c"), [9, 3, 1])
    f = feasibility_vector(j)
    assert [f[k] for k in "abc"] == pytest.approx([9 / 13, 3 / 13, 1 / 13], abs=1e-9)
    assert [round(f[k], 3) for k in "abc"] == [0.692, 0.231, 0.077]
    assert f.lambda_max == pytest.approx(3.0, abs=1e-9)
    assert f.consistency_ratio == pytest.approx(0.0, abs=1e-9)


def test_perturbed_matches_dense_and_charpoly():
    j = JudgmentMatrix.from_upper(("a", "b", "c"), {("a", "b"): 3, ("a", "c"): 5, ("b", "c"): 2})
    lam, v = principal_eigenvector(j)
    lam_ref, v_ref = dense_eigenpair(j.values)
    assert lam == pytest.approx(lam_ref, abs=1e-8)
    assert lam == pytest.approx(charpoly_root(j.values), abs=1e-8)
    assert v == pytest.approx(v_ref, abs=1e-8)


def test_ci_cr_arithmetic():
    j = JudgmentMatrix(("a", "b", "c"), np.ones((3, 3)))
    ci, cr = consistency_ratio(j, 3.09)
    assert ci == pytest.approx(0.045, abs=1e-12)
    assert cr == pytest.approx(0.045 / 0.58, abs=1e-12)
    assert round(cr, 3) == 0.078 and cr < 0.1


def test_q2_cr_zero():
    j = JudgmentMatrix.from_upper(("a", "b"), {("a", "b"): 7})
    assert consistency_ratio(j, 2.0) == (0.0, 0.0)
    assert feasibility_vector(j).consistency_ratio == 0.0


def test_heavy_perturbation_rejected():
    j = JudgmentMatrix.from_upper(("a", "b", "c"), {("a", "b"): 9, ("a", "c"): 1 / 9, ("b", "c"): 9})
    with pytest.raises(InconsistentJudgmentsError, match="inconsistent judgments, revise matrix"):
        feasibility_vector(j)


def test_cr_about_025_rejected():
    j = JudgmentMatrix.from_upper(("a", "b", "c"), {("a", "b"): 1 / 5, ("a", "c"): 1 / 9, ("b", "c"): 1 / 9})
    lam, _ = principal_eigenvector(j)
    _, cr = consistency_ratio(j, lam)
    assert cr == pytest.approx(0.254, abs=1e-3)
    with pytest.raises(InconsistentJudgmentsError):
        feasibility_vector(j)


def test_fixture_judgments_shape():
    f = feasibility_vector(read_judgments(JUDGMENTS_CSV.encode()))
    assert [round(f[k], 2) for k in ("car_crowding", "station_crowding", "ticketing_topup")] == \
        [0.06, 0.19, 0.74]
    assert sum(f.feasibility.values()) == pytest.approx(1.0)
    assert f.consistency_ratio < 0.1


def test_parse_ratio():
    assert parse_ratio("1/3") == pytest.approx(1 / 3)
    assert parse_ratio(" 5 ") == 5.0


def test_bad_matrices():
    with pytest.raises(ValueError):
        JudgmentMatrix(("a", "b"), np.array([[1, 2], [2, 1]]))
    with pytest.raises(ValueError):
        JudgmentMatrix.from_upper(("a", "b"), {("a", "b"): 12})
    with pytest.raises(ValueError):
        read_judgments(b"x,y,z\na,b,3\n")


def test_lower_triangle_derived():
    j = read_judgments(b"i,j,value\na,b,3\n")
    assert j.values[1, 0] == pytest.approx(1 / 3)


def test_order_over_nine_raises():
    labels = tuple(f"x{i}" for i in range(10))
    j = JudgmentMatrix(labels, np.ones((10, 10)))
    with pytest.raises(ValueError):
        consistency_ratio(j, 10.0)


weight_vectors = st.integers(3, 7).flatmap(
    lambda q: st.lists(st.floats(1, 3), min_size=q, max_size=q))


@settings(max_examples=100, deadline=None)
@given(weight_vectors)
def test_consistent_recovers_weights(w):
    labels = tuple(f"x{i}" for i in range(len(w)))
    f = feasibility_vector(JudgmentMatrix.from_weights(labels, w))
    assert [f[k] for k in labels] == pytest.approx(np.array(w) / sum(w), abs=1e-6)
    assert f.consistency_ratio < 1e-8


def _random_reciprocal(rng, q):
    scale = [1 / 9, 1 / 7, 1 / 5, 1 / 3, 1, 3, 5, 7, 9]
    a = np.ones((q, q))
    for i in range(q):
        for k in range(i + 1, q):
            a[i, k] = rng.choice(scale)
            a[k, i] = 1 / a[i, k]
    return a


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 7))
def test_general_properties(seed, q):
    rng = np.random.default_rng(seed)
    a = _random_reciprocal(rng, q)
    labels = tuple(f"x{i}" for i in range(q))
    j = JudgmentMatrix(labels, a)
    lam, v = principal_eigenvector(j)
    assert lam >= q - 1e-9
    assert np.all(v > 0) and v.sum() == pytest.approx(1.0)
    lam_ref, v_ref = dense_eigenpair(a)
    assert lam == pytest.approx(lam_ref, abs=1e-8)
    # relabeling permutes the output identically
    perm = rng.permutation(q)
    jp = JudgmentMatrix(tuple(labels[i] for i in perm), a[np.ix_(perm, perm)])
    _, vp = principal_eigenvector(jp)
    assert vp == pytest.approx(v[perm], abs=1e-8)
    # rebuilding from the upper triangle alone gives the same matrix
    upper = {(labels[i], labels[k]): a[i, k] for i in range(q) for k in range(i + 1, q)}
    assert np.allclose(JudgmentMatrix.from_upper(labels, upper).values, a)
