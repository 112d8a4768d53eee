import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from revspam.models import Tree, fit_tree
from revspam.models.tree import TIE_EPS


def gini(y):
    if len(y) == 0:
        return 0.0
    p = np.mean(y)
    return 2 * p * (1 - p)


def exhaustive_best(X, y, msl):
    """Every (column, midpoint) candidate, scored by weighted Gini decrease."""
    n = len(y)
    parent = gini(y)
    cands = []
    for c in range(X.shape[1]):
        vals = np.unique(X[:, c])
        for lo, hi in zip(vals, vals[1:]):
            thr = (lo + hi) / 2
            left = X[:, c] <= thr
            nl = left.sum()
            if nl < msl or n - nl < msl:
                continue
            gain = parent - (nl * gini(y[left]) + (n - nl) * gini(y[~left])) / n
            cands.append((gain, c, thr))
    return cands


def node_rows(tree, X):
    """Row indices reaching every node."""
    reach = {0: np.arange(len(X))}
    for i in range(tree.n_nodes):
        if tree.feature[i] >= 0:
            rows = reach[i]
            go = X[rows, tree.feature[i]] <= tree.threshold[i]
            reach[tree.left[i]] = rows[go]
            reach[tree.right[i]] = rows[~go]
    return reach


def node_depths(tree):
    d = {0: 0}
    for i in range(tree.n_nodes):
        if tree.feature[i] >= 0:
            d[tree.left[i]] = d[tree.right[i]] = d[i] + 1
    return d


def check_against_oracle(X, y, max_depth, msl):
    tree = fit_tree(sp.csr_matrix(X), y, max_depth=max_depth, min_samples_leaf=msl)
    reach, depth = node_rows(tree, X), node_depths(tree)
    for i in range(tree.n_nodes):
        rows = reach[i]
        yi = y[rows]
        assert tree.value[i] == pytest.approx(yi.mean())
        cands = exhaustive_best(X[rows], yi, msl)
        splittable = depth[i] < max_depth and yi.min() < yi.max() and cands
        if tree.feature[i] < 0:
            assert not splittable, f"node {i} should have split"
            continue
        assert splittable
        best = max(g for g, _, _ in cands)
        tied = sorted((c, t) for g, c, t in cands if g >= best - 1e-9)
        assert (tree.feature[i], tree.threshold[i]) == pytest.approx(tied[0])
    return tree


@pytest.mark.parametrize("seed", range(50))
def test_split_selection_matches_exhaustive(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(2, 31)), int(rng.integers(1, 6))
    # few distinct values so ties and repeated values both show up; some columns sparse
    X = rng.integers(0, 4, size=(n, m)).astype(float) * (rng.random((n, m)) < 0.7)
    X[:, ::2] -= rng.integers(0, 2, size=(n, (m + 1) // 2))  # negatives around the zero block
    y = rng.integers(0, 2, n).astype(float)
    check_against_oracle(X, y, max_depth=int(rng.integers(1, 5)), msl=int(rng.integers(1, 4)))


def test_one_dimensional_example():
    tree = fit_tree(np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([0, 0, 1, 1.0]),
                    max_depth=3)
    assert tree.feature[0] == 0 and tree.threshold[0] == 2.5
    assert tree.n_nodes == 3
    assert list(tree.predict(np.array([[0.0], [2.5], [2.6]]))) == [0, 0, 1]


def test_xor_needs_a_zero_gain_first_split():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    y = np.array([0, 1, 1, 0], dtype=float)
    tree = fit_tree(X, y, max_depth=2, min_samples_leaf=1)
    assert np.array_equal(tree.predict(X), y)
    assert tree.depth == 2


def test_limits_respected():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 3))
    y = (rng.random(200) < 0.5).astype(float)
    tree = fit_tree(X, y, max_depth=3, min_samples_leaf=10)
    assert tree.depth <= 3
    reach = node_rows(tree, X)
    assert all(len(reach[i]) >= 10 for i in range(tree.n_nodes) if tree.feature[i] < 0)


def test_weights_equal_row_repetition():
    rng = np.random.default_rng(4)
    X = rng.integers(0, 3, size=(25, 3)).astype(float)
    y = rng.integers(0, 2, 25).astype(float)
    w = rng.integers(0, 3, 25).astype(float)
    weighted = fit_tree(X, y, max_depth=4, weight=w)
    rep = np.repeat(np.arange(25), w.astype(int))
    repeated = fit_tree(X[rep], y[rep], max_depth=4)
    assert np.array_equal(weighted.predict(X), repeated.predict(X))


def test_sparse_and_dense_agree():
    rng = np.random.default_rng(5)
    X = rng.random((60, 6)) * (rng.random((60, 6)) < 0.3)
    y = (X[:, 1] + X[:, 4] > 0.3).astype(float)
    a = fit_tree(sp.csr_matrix(X), y, max_depth=5)
    b = fit_tree(X, y, max_depth=5)
    assert np.array_equal(a.feature, b.feature) and np.array_equal(a.threshold, b.threshold)
    assert np.array_equal(a.predict(sp.csr_matrix(X)), a.predict(X))


def test_tree_roundtrip():
    tree = fit_tree(np.array([[1.0], [2.0], [3.0]]), np.array([0, 1, 1.0]), max_depth=2)
    back = Tree.from_dict(tree.to_dict())
    assert all(np.array_equal(getattr(back, f), getattr(tree, f))
               for f in ("feature", "threshold", "left", "right", "value"))


def test_bad_limits():
    with pytest.raises(ValueError):
        fit_tree(np.eye(2), np.array([0, 1.0]), max_depth=2, min_samples_leaf=0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2), st.booleans()),
                min_size=2, max_size=25),
       st.integers(1, 4))
def test_oracle_property(rows, depth):
    X = np.array([r[:2] for r in rows], dtype=float)
    y = np.array([r[2] for r in rows], dtype=float)
    check_against_oracle(X, y, max_depth=depth, msl=1)


def test_tie_slack_is_tiny():
    assert 0 < TIE_EPS < 1e-9
