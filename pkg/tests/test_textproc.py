import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from revspam import textproc
from revspam.textproc import (
    SparseVector,
    TfIdfModel,
    build_vocabulary,
    default_stopwords,
    fit_idf,
    preprocess,
    remove_stopwords,
    tokenize,
    transform,
    transform_many,
)


def scan_tokens(text):
    # character-at-a-time reference: alphanumerics (underscore excluded) form tokens
    out, cur = [], []
    for ch in text.lower():
        if ch.isalnum() and ch != "_":
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def test_worked_example():
    assert tokenize("This phone case is great.") == ["this", "phone", "case", "is", "great"]
    assert preprocess("This phone case is great.") == ["phone", "case", "great"]


@settings(max_examples=300)
@given(st.text(alphabet=st.characters(codec="utf-8", exclude_categories=("Cs",)), max_size=60))
def test_tokenizer_matches_scan(text):
    assert tokenize(text) == scan_tokens(text)


def test_stoplist_contents():
    stop = default_stopwords()
    assert len(stop) == 179
    assert {"this", "is", "the", "a"} <= stop
    assert "great" not in stop and "phone" not in stop


def test_remove_stopwords_custom(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("Foo\nbar\n\n")
    stop = textproc.load_stopwords(path)
    assert remove_stopwords(["foo", "baz", "bar"], stop) == ["baz"]


def test_vocabulary_min_df_and_cap():
    docs = [["a", "b"], ["a", "c"], ["a", "b"], ["d"]]
    v = build_vocabulary(docs, max_terms=10, min_df=2)
    assert v.terms == ["a", "b"] and v.df("a") == 3 and v.n_documents == 4
    v1 = build_vocabulary(docs, max_terms=1, min_df=1)
    assert v1.terms == ["a"]
    # df ties at the cap are broken alphabetically
    v2 = build_vocabulary(docs, max_terms=3, min_df=1)
    assert v2.terms == ["a", "b", "c"]


def test_vocabulary_parallel_matches():
    rng = np.random.default_rng(0)
    letters = np.array(list("abcdefghij"))
    docs = [list(d) for d in rng.choice(letters, size=(12_000, 5))]
    a = build_vocabulary(docs, max_terms=6, min_df=1)
    b = build_vocabulary(docs, max_terms=6, min_df=1, workers=3)
    assert a.terms == b.terms and np.array_equal(a.document_frequency, b.document_frequency)


def dense_tfidf(docs):
    """Brute force: count matrix, smoothed idf, row L2 normalisation."""
    terms = sorted({t for d in docs for t in d})
    n = len(docs)
    out = np.zeros((n, len(terms)))
    for j, t in enumerate(terms):
        df = sum(t in d for d in docs)
        idf = math.log((n + 1) / (df + 1)) + 1
        for i, d in enumerate(docs):
            out[i, j] = d.count(t) * idf
    for i in range(n):
        nrm = math.sqrt(sum(x * x for x in out[i]))
        if nrm:
            out[i] /= nrm
    return terms, out


def random_corpus(rng):
    n_terms = int(rng.integers(1, 41))
    n_docs = int(rng.integers(1, 51))
    terms = [f"t{i}" for i in range(n_terms)]
    return [list(rng.choice(terms, size=int(rng.integers(0, 15)))) for _ in range(n_docs)]


def check_tfidf(docs, tol=1e-9):
    terms, expected = dense_tfidf(docs)
    model = fit_idf(build_vocabulary(docs, max_terms=10_000, min_df=1))
    assert model.vocabulary.terms == terms
    X = transform_many(docs, model)
    assert np.abs(X.toarray() - expected).max(initial=0) <= tol
    norms = np.sqrt(X.multiply(X).sum(axis=1).A1)
    nonzero = np.diff(X.indptr) > 0
    assert np.all(np.abs(norms[nonzero] - 1) <= tol)


@pytest.mark.parametrize("seed", range(25))
def test_tfidf_matches_dense_oracle(seed):
    check_tfidf(random_corpus(np.random.default_rng(seed)))


def test_tfidf_empty_and_oov_rows():
    model = fit_idf(build_vocabulary([["a", "b"], ["b"]], min_df=1))
    v = transform(["zzz"], model)
    assert v.dimension == 2 and len(v.indices) == 0
    v = transform(["a", "a", "zzz"], model)
    assert v.is_valid() and v.norm() == pytest.approx(1.0)


def test_tfidf_roundtrip(tmp_path):
    docs = [["x", "y"], ["y", "z", "z"], ["x"]]
    model = fit_idf(build_vocabulary(docs, min_df=1))
    model.save(tmp_path / "m.json")
    back = TfIdfModel.load(tmp_path / "m.json")
    assert back.vocabulary.terms == model.vocabulary.terms
    assert np.array_equal(back.idf, model.idf)
    assert (transform_many(docs, back) != transform_many(docs, model)).nnz == 0


def test_sparse_vector_helpers():
    v = SparseVector.from_dense([0, 2.0, 0, -1.0])
    assert v.is_valid() and list(v.indices) == [1, 3]
    assert np.array_equal(v.to_dense(), [0, 2.0, 0, -1.0])
    assert v.to_csr().shape == (1, 4)
    assert not SparseVector(3, [2, 1], [1.0, 1.0]).is_valid()
    assert SparseVector.zeros(5).norm() == 0.0
