import csv

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from revspam.corpus import NON_SPAM, SPAM
from revspam.featurize import Featurizer
from revspam.features import (
    BEHAVIORAL_COLUMNS,
    ChiSquareScore,
    FeatureMatrix,
    MinMaxBounds,
    assemble_matrix,
    behavioral_features,
    chi_square_array,
    chi_square_scores,
    pearson_correlation_matrix,
    reviewer_counts,
    select_top_k,
    to_internal_labels,
    write_chi_square_csv,
)
from revspam.textproc import SparseVector


def contingency_chi2(a, b, c, d):
    """N(ad - bc)^2 / ((a+b)(c+d)(a+c)(b+d)); 0 when a margin is empty."""
    n = a + b + c + d
    den = (a + b) * (c + d) * (a + c) * (b + d)
    return 0.0 if den == 0 else n * (a * d - b * c) ** 2 / den


def test_worked_chi_square():
    # a: present & spam, b: present & genuine, c: absent & spam, d: absent & genuine
    a, b, c, d = 10, 20, 20, 10
    x = np.array([1] * (a + b) + [0] * (c + d), dtype=float)
    y = np.array([1] * a + [0] * b + [1] * c + [0] * d)
    got = chi_square_array(sp.csr_matrix(x[:, None]), y)[0]
    assert got == pytest.approx(20 / 3, abs=1e-9)
    assert contingency_chi2(a, b, c, d) == pytest.approx(6.6667, abs=1e-4)


@pytest.mark.parametrize("seed", range(20))
def test_chi_square_binary_matches_contingency(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(2, 101)), int(rng.integers(1, 8))
    X = (rng.random((n, m)) < rng.random(m)).astype(float)
    y = np.r_[0, 1, rng.integers(0, 2, n - 2)]
    got = chi_square_array(sp.csr_matrix(X), y)
    for j in range(m):
        a = int(((X[:, j] == 1) & (y == 1)).sum())
        b = int(((X[:, j] == 1) & (y == 0)).sum())
        c = int(((X[:, j] == 0) & (y == 1)).sum())
        d = int(((X[:, j] == 0) & (y == 0)).sum())
        assert abs(got[j] - contingency_chi2(a, b, c, d)) <= 1e-9


def test_chi_square_guards():
    with pytest.raises(ValueError):
        chi_square_array(sp.csr_matrix([[1.0], [0.0]]), [1, 1])
    with pytest.raises(ValueError):
        chi_square_array(sp.csr_matrix([[2.0], [0.0]]), [1, 0])


def test_select_top_k_ties_to_lower_column():
    scores = [ChiSquareScore(0, 1.0), ChiSquareScore(1, 3.0), ChiSquareScore(2, 3.0),
              ChiSquareScore(3, 2.0)]
    assert select_top_k(scores, 2) == [1, 2]
    assert select_top_k(scores, 3) == [1, 2, 3]
    assert select_top_k(scores, 10) == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        select_top_k(scores, 0)


def test_chi_square_csv(tmp_path):
    path = tmp_path / "c.csv"
    write_chi_square_csv([ChiSquareScore(0, 1.0), ChiSquareScore(1, 2.5)], ["x", "y"], path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["rank", "column", "name", "chi_square"]
    assert rows[1][:3] == ["1", "1", "y"]


def test_label_flip():
    assert list(to_internal_labels([SPAM, NON_SPAM, SPAM])) == [1, 0, 1]
    with pytest.raises(ValueError):
        to_internal_labels([2])


def test_behavioral_features(record_factory):
    r = record_factory(text="This phone case is great.", summary="Five stars", helpful=(3, 4),
                       reviewer="X")
    f = behavioral_features(r, {"X": 7})
    assert f.as_tuple() == (5, 2, 0.75, 7)
    r0 = record_factory(helpful=(0, 0), reviewer="Y")
    assert behavioral_features(r0, {}).helpfulness_ratio == 0.0
    assert behavioral_features(r0, {}).reviewer_frequency == 0


def test_minmax_no_clip_and_constant_column():
    train = np.array([[0.0, 5.0], [10.0, 5.0]])
    b = MinMaxBounds.fit(train)
    out = b.apply(np.array([[5.0, 9.0], [20.0, 5.0]]))
    assert np.array_equal(out, [[0.5, 0.0], [2.0, 0.0]])
    back = MinMaxBounds.from_dict(b.to_dict())
    assert np.array_equal(back.lo, b.lo) and np.array_equal(back.hi, b.hi)


def test_assemble_matrix_layout():
    text = [SparseVector.from_dense([0.6, 0.8]), SparseVector.zeros(2)]
    beh = np.array([[1, 2, 0.5, 1], [3, 2, 1.0, 4]], dtype=float)
    m = assemble_matrix(text, beh, [SPAM, NON_SPAM])
    assert m.column_names == ["term_0", "term_1", *BEHAVIORAL_COLUMNS]
    assert list(m.labels) == [1, 0]
    assert np.allclose(m.X.toarray(), [[0.6, 0.8, 0, 0, 0, 0], [0, 0, 1, 0, 1, 1]])
    sel = assemble_matrix(text, beh, [SPAM, NON_SPAM], selected=[1, 4])
    assert sel.column_names == ["term_1", "helpfulness_ratio"]
    with pytest.raises(ValueError):
        assemble_matrix(text, beh[:1], [SPAM, NON_SPAM])
    with pytest.raises(IndexError):
        assemble_matrix(text, beh, [SPAM, NON_SPAM], selected=[6])


def test_feature_matrix_views():
    m = FeatureMatrix.from_dense(np.array([[0, 1.0], [2.0, 0]]), np.array([1, 0]), ["a", "b"])
    assert m.n_rows == 2 and m.dimension == 2
    assert m.row(1).is_valid() and list(m.row(1).indices) == [0]
    assert m.subset_rows([1]).labels.tolist() == [0]
    assert m.select_columns([1]).column_names == ["b"]


def test_correlation_oracle_and_constant():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=50), rng.normal(size=50)
    cm = pearson_correlation_matrix({"x": x, "y": y, "z": np.ones(50)})
    assert cm.values[0, 1] == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)
    assert cm.constant == ["z"]
    assert cm.values[2, 2] == 1.0 and cm.values[0, 2] == 0.0
    assert np.array_equal(cm.values, cm.values.T)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=2, max_size=40))
def test_correlation_bounded_symmetric(pairs):
    a, b = zip(*pairs)
    cm = pearson_correlation_matrix({"a": a, "b": b})
    assert np.all(np.abs(cm.values) <= 1.0)
    assert cm.values[0, 1] == cm.values[1, 0]


def test_featurizer_fit_transform_roundtrip(tiny_records, tmp_path):
    train, test = tiny_records[:14], tiny_records[14:]
    fz, matrix, scores = Featurizer.fit(train, min_df=1, text_k=5)
    assert matrix.dimension == 5 + 4 == fz.dimension
    assert len(scores) == fz.tfidf.dimension + 4
    assert matrix.column_names[-4:] == list(BEHAVIORAL_COLUMNS)
    counts = reviewer_counts(train)
    assert fz.reviewer_counts == counts
    fz.save(tmp_path / "f.json")
    back = Featurizer.load(tmp_path / "f.json")
    a, b = fz.transform(test), back.transform(test)
    assert (a.X != b.X).nnz == 0 and a.column_names == b.column_names
    # refitting on the same rows is deterministic
    fz2, _, _ = Featurizer.fit(train, min_df=1, text_k=5)
    assert np.array_equal(fz2.tfidf.idf, fz.tfidf.idf)


def test_chi_square_scores_on_matrix(tiny_records):
    _, matrix, _ = Featurizer.fit(tiny_records, min_df=1, text_k=3)
    s = chi_square_scores(matrix)
    assert len(s) == matrix.dimension and all(x.score >= 0 for x in s)
