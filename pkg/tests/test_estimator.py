import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psidep.errors import DegenerateInputError
from psidep.estimator import (
    ContingencyCounts,
    LabelVector,
    contingency,
    estimate_psi,
    psi_hat,
    psi_hat_norm,
)
from psidep.graph import NeighborGraph, build_neighbor_graph
from psidep.metric import PointCloud


def table(*rows):
    return ContingencyCounts.from_counts(rows)


def test_labels_recoded_by_first_appearance():
    y = LabelVector.from_raw(["b", "a", "b", "c"])
    assert y.codes.tolist() == [0, 1, 0, 2]
    assert y.levels == ("b", "a", "c")
    assert y.K == 3 and y.n == 4
    assert y.raw.tolist() == ["b", "a", "b", "c"]


def test_labels_validation():
    with pytest.raises(ValueError):
        LabelVector.from_raw([])
    with pytest.raises(ValueError):
        LabelVector.from_raw([[1, 2]])


def test_contingency_two_points():
    g = NeighborGraph.from_neighbors([1, 0])
    c = contingency([1, 2], g)
    np.testing.assert_array_equal(c.joint, [[0, 0.5], [0.5, 0]])


def test_contingency_three_points():
    g = NeighborGraph.from_neighbors([1, 0, 1])
    c = contingency([1, 1, 2], g)
    np.testing.assert_allclose(c.joint, [[2 / 3, 0], [1 / 3, 0]])
    assert c.empty_levels().tolist() == [1]


def test_contingency_single_level():
    g = NeighborGraph.from_neighbors([1, 0, 1])
    c = contingency([4, 4, 4], g)
    np.testing.assert_array_equal(c.joint, [[1.0]])


def test_contingency_length_mismatch():
    with pytest.raises(ValueError):
        contingency([0, 1, 0], NeighborGraph.from_neighbors([1, 0]))


def test_psi_perfect_diagonal():
    assert psi_hat(table([1, 0], [0, 1])) == 1.0


def test_psi_factorized():
    assert psi_hat(table([1, 2], [2, 4])) == pytest.approx(0.0, abs=1e-15)


def test_psi_symmetric_example():
    assert psi_hat(table([4, 1], [1, 4])) == pytest.approx(0.36, abs=1e-14)


def test_psi_on_a_line_by_hand():
    # pairs (0,1) (1,0) (0,1) (1,0) (1,1): chi-squared sum is 4/9
    g = build_neighbor_graph(PointCloud.euclidean([0.0, 1.0, 3.0, 6.0, 10.0]))
    c = contingency([0, 1, 0, 1, 1], g)
    np.testing.assert_array_equal(c.counts, [[0, 2], [2, 1]])
    assert psi_hat(c) == pytest.approx(4 / 9, abs=1e-15)


def test_psi_drops_empty_levels():
    # level 2 appears as a label but never as a neighbour label
    c = table([3, 1, 0], [1, 3, 0], [1, 0, 0])
    reduced = np.array([[3, 1], [1, 3], [1, 0]]) / 9.0
    row, col = reduced.sum(1), reduced.sum(0)
    expected = np.sum((reduced - np.outer(row, col)) ** 2 / np.outer(row, col)) / 1
    assert psi_hat(c) == pytest.approx(expected, abs=1e-15)


def test_psi_single_level_is_degenerate():
    with pytest.raises(DegenerateInputError):
        psi_hat(table([5]))
    with pytest.raises(DegenerateInputError):
        psi_hat(table([0, 3], [0, 2]))


def test_norm_frobenius_matches_symmetric():
    c = table([4, 1], [1, 4])
    assert psi_hat_norm(c) == pytest.approx(0.36, abs=1e-14)


@pytest.mark.parametrize("norm", ["weighted_frobenius", "weighted_trace"])
def test_norm_factorized_is_zero(norm):
    assert psi_hat_norm(table([1, 2], [2, 4]), norm=norm) == pytest.approx(0.0, abs=1e-15)


def test_norm_trace_identity_perfect():
    assert psi_hat_norm(table([1, 0], [0, 1]), "weighted_trace", "identity") == pytest.approx(1.0)


def test_norm_rejects_unknown_options():
    with pytest.raises(ValueError):
        psi_hat_norm(table([1, 0], [0, 1]), norm="spectral")
    with pytest.raises(ValueError):
        psi_hat_norm(table([1, 0], [0, 1]), gamma="cube")


def symmetric_tables(max_k=5, max_count=30):
    @st.composite
    def build(draw):
        k = draw(st.integers(2, max_k))
        upper = [[draw(st.integers(0, max_count)) for _ in range(k)] for _ in range(k)]
        a = np.array(upper)
        a = np.triu(a) + np.triu(a, 1).T
        if np.count_nonzero(a.sum(1)) < 2:
            a[0, 0] += 1
            a[1, 1] += 1
        return ContingencyCounts.from_counts(a)

    return build()


@settings(max_examples=100, deadline=None)
@given(symmetric_tables())
def test_frobenius_representation(c):
    # on a symmetric table both routes give the same number
    k_eff = np.count_nonzero(c.row)
    p = c.row[c.row > 0]
    j = c.joint[np.ix_(c.row > 0, c.row > 0)]
    d = np.diag(p ** -0.5)
    frob = np.linalg.norm(d @ (j - np.outer(p, p)) @ d, "fro") ** 2 / (k_eff - 1)
    assert psi_hat(c) == pytest.approx(frob, abs=1e-12)
    assert psi_hat_norm(c) == pytest.approx(frob, abs=1e-12)


@st.composite
def labelled_cloud(draw):
    n = draw(st.integers(4, 60))
    k = draw(st.integers(2, 5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, 2)), rng.integers(0, k, size=n), rng


@settings(max_examples=80, deadline=None)
@given(labelled_cloud())
def test_permutation_invariance_is_exact(data):
    x, y, rng = data
    g = build_neighbor_graph(PointCloud.euclidean(x))
    perm = rng.permutation(10) + 100
    try:
        a = psi_hat(contingency(y, g))
    except DegenerateInputError:
        return
    b = psi_hat(contingency(perm[y], g))
    c = psi_hat(contingency(np.array(["q", "r", "s", "t", "u"])[y], g))
    assert a == b == c


@settings(max_examples=80, deadline=None)
@given(labelled_cloud())
def test_range_and_marginals(data):
    x, y, _ = data
    g = build_neighbor_graph(PointCloud.euclidean(x))
    c = contingency(y, g)
    assert c.counts.sum() == g.n
    np.testing.assert_array_equal(c.counts.sum(axis=1), np.bincount(LabelVector.from_raw(y).codes))
    col_expected = np.bincount(LabelVector.from_raw(y).codes, weights=g.in_degree, minlength=c.K)
    np.testing.assert_array_equal(c.counts.sum(axis=0), col_expected)
    try:
        v = psi_hat(c)
    except DegenerateInputError:
        return
    assert 0.0 <= v <= 1.0 + 10.0 / g.n


def test_estimate_psi_result():
    x = np.array([0.0, 1.0, 10.0, 11.0])
    res = estimate_psi(PointCloud.euclidean(x), ["a", "a", "b", "b"])
    assert res.psi_hat == 1.0
    assert res.n == 4 and res.K == 2 and res.w_n == 1.0 and res.l_n == 1
    assert res.warnings == ()


def test_estimate_psi_reports_dropped_levels():
    x = np.array([0.0, 1.0, 10.0, 11.0, 30.0])
    res = estimate_psi(PointCloud.euclidean(x), ["a", "a", "b", "b", "c"])
    assert res.K == 2
    assert any("'c'" in w for w in res.warnings)


def test_estimate_psi_length_mismatch():
    with pytest.raises(ValueError):
        estimate_psi(PointCloud.euclidean([0.0, 1.0, 2.0]), [0, 1])


def test_consistency_dependent_and_independent():
    rng = np.random.default_rng(11)
    x = rng.random((2000, 2))
    y = (np.sin(2 * np.pi * (x[:, 0] + x[:, 1])) >= 0).astype(int)
    assert estimate_psi(PointCloud.euclidean(x), y).psi_hat >= 0.8
    y3 = rng.integers(0, 3, size=2000)
    assert estimate_psi(PointCloud.euclidean(x), y3).psi_hat <= 0.02
