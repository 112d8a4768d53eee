"""Tokenisation, stop-word filtering and TF-IDF vectorisation."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from revspam._parallel import parallel_map

TFIDF_FORMAT = "revspam-tfidf"
TFIDF_VERSION = 1

DEFAULT_MAX_TERMS = 20_000
DEFAULT_MIN_DF = 2

# \w minus underscore: the letters and digits of str.isalnum()
_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on every run of non-alphanumerics.

    >>> tokenize("This phone case is great.")
    ['this', 'phone', 'case', 'is', 'great']
    >>> tokenize("Wi-Fi 100%")
    ['wi', 'fi', '100']
    """
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=None)
def default_stopwords() -> frozenset[str]:
    """The bundled English stop list (179 entries, one per line)."""
    text = resources.files("revspam").joinpath("data", "stopwords_en.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def load_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def remove_stopwords(tokens: Sequence[str], stoplist: Iterable[str] | None = None) -> list[str]:
    if stoplist is None:
        stoplist = default_stopwords()
    return [t for t in tokens if t not in stoplist]


def preprocess(text: str, stoplist: frozenset[str] | None = None) -> list[str]:
    return remove_stopwords(tokenize(text), stoplist)


# --------------------------------------------------------------------------- sparse vectors

@dataclass(frozen=True)
class SparseVector:
    """Nonzero entries of a vector, indices strictly increasing."""

    dimension: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    @classmethod
    def zeros(cls, dimension: int) -> "SparseVector":
        return cls(dimension, np.empty(0, np.int64), np.empty(0, np.float64))

    @classmethod
    def from_dense(cls, dense) -> "SparseVector":
        dense = np.asarray(dense, dtype=np.float64)
        idx = np.flatnonzero(dense)
        return cls(len(dense), idx, dense[idx])

    @classmethod
    def from_csr_row(cls, matrix: sp.csr_matrix, i: int) -> "SparseVector":
        lo, hi = matrix.indptr[i], matrix.indptr[i + 1]
        return cls(matrix.shape[1], matrix.indices[lo:hi].copy(), matrix.data[lo:hi].copy())

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        out[self.indices] = self.values
        return out

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, self.indices, [0, len(self.indices)]),
                             shape=(1, self.dimension))

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def is_valid(self) -> bool:
        idx = self.indices
        return bool(
            len(idx) == len(self.values)
            and np.all(np.diff(idx) > 0)
            and (len(idx) == 0 or (idx[0] >= 0 and idx[-1] < self.dimension))
            and np.all(self.values != 0)
        )

    def __len__(self):
        return self.dimension


# --------------------------------------------------------------------------- vocabulary and idf

@dataclass
class Vocabulary:
    terms: list[str]
    document_frequency: np.ndarray
    n_documents: int
    term_to_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.document_frequency = np.asarray(self.document_frequency, dtype=np.int64)
        self.term_to_index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self):
        return len(self.terms)

    def df(self, term: str) -> int:
        return int(self.document_frequency[self.term_to_index[term]])


def _count_df(docs: Sequence[Sequence[str]]) -> Counter:
    counts: Counter = Counter()
    for doc in docs:
        counts.update(set(doc))
    return counts


def _chunks(seq: Sequence, size: int):
    for i in range(0, len(seq), size):
        yield seq[i:i + size]


def build_vocabulary(documents: Sequence[Sequence[str]], max_terms: int = DEFAULT_MAX_TERMS,
                     min_df: int = DEFAULT_MIN_DF, workers: int = 1) -> Vocabulary:
    """Keep terms with ``df >= min_df``; cap at the ``max_terms`` most frequent.

    Frequency ties at the cap are broken by the term itself, ascending, and
    the surviving terms are indexed in lexicographic order. Per-chunk counts
    are merged by addition, so the result does not depend on ``workers``.
    """
    df: Counter = Counter()
    if workers > 1 and len(documents) > 10_000:
        size = -(-len(documents) // (workers * 4))
        for part in parallel_map(_count_df, _chunks(documents, size), workers=workers):
            df.update(part)
    else:
        df = _count_df(documents)

    kept = [(t, c) for t, c in df.items() if c >= min_df]
    if len(kept) > max_terms:
        kept.sort(key=lambda tc: (-tc[1], tc[0]))
        kept = kept[:max_terms]
    kept.sort()
    terms = [t for t, _ in kept]
    return Vocabulary(terms, np.array([c for _, c in kept], dtype=np.int64), len(documents))


@dataclass
class TfIdfModel:
    vocabulary: Vocabulary
    idf: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.vocabulary)

    def to_dict(self) -> dict:
        v = self.vocabulary
        return {
            "format": TFIDF_FORMAT,
            "version": TFIDF_VERSION,
            "n_documents": v.n_documents,
            "terms": v.terms,
            "df": v.document_frequency.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfIdfModel":
        if d.get("format") != TFIDF_FORMAT or d.get("version") != TFIDF_VERSION:
            raise ValueError("not a version-1 TF-IDF model document")
        return fit_idf(Vocabulary(d["terms"], d["df"], d["n_documents"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TfIdfModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def fit_idf(vocabulary: Vocabulary) -> TfIdfModel:
    """Smoothed idf: ``ln((N + 1) / (df + 1)) + 1``."""
    n = vocabulary.n_documents
    df = vocabulary.document_frequency.astype(np.float64)
    idf = np.log((n + 1.0) / (df + 1.0)) + 1.0
    return TfIdfModel(vocabulary, idf)


def transform_many(documents: Sequence[Sequence[str]], model: TfIdfModel) -> sp.csr_matrix:
    """TF-IDF rows for many token lists as an L2-normalised CSR matrix.

    Out-of-vocabulary tokens are ignored; a document with no known token
    becomes an empty row.
    """
    lookup = model.vocabulary.term_to_index
    indptr = [0]
    cols: list[int] = []
    for doc in documents:
        cols.extend(idx for idx in map(lookup.get, doc) if idx is not None)
        indptr.append(len(cols))
    indptr = np.asarray(indptr, dtype=np.int64)
    cols_arr = np.asarray(cols, dtype=np.int64)
    ones = np.ones(len(cols_arr))
    X = sp.csr_matrix((ones, cols_arr, indptr), shape=(len(documents), model.dimension))
    X.sum_duplicates()  # merges repeated terms into raw counts, sorts indices
    X.data *= model.idf[X.indices]
    sq = X.multiply(X).sum(axis=1).A1
    norms = np.sqrt(sq)
    row_len = np.diff(X.indptr)
    scale = np.repeat(np.where(norms > 0, norms, 1.0), row_len)
    X.data /= scale
    return X


def transform(tokens: Sequence[str], model: TfIdfModel) -> SparseVector:
    return SparseVector.from_csr_row(transform_many([tokens], model), 0)
