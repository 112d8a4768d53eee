"""Behavioural features, chi-square selection, correlation and matrix assembly."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from revspam.corpus import ReviewRecord
from revspam.textproc import SparseVector, tokenize

BEHAVIORAL_COLUMNS = ("review_length", "summary_length", "helpfulness_ratio", "reviewer_frequency")
CORRELATION_VARIABLES = ("label", "rating", "unix_review_time", *BEHAVIORAL_COLUMNS)

DEFAULT_TEXT_K = 2000


def to_internal_labels(labels) -> np.ndarray:
    """Map dataset labels (0 = spam, 1 = non-spam) to detection labels (1 = spam).

    This is the only place the orientation flips; everything downstream of
    :func:`assemble_matrix` treats spam as the positive class.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return 1 - labels


@dataclass(frozen=True)
class BehavioralFeatures:
    review_length: int
    summary_length: int
    helpfulness_ratio: float
    reviewer_frequency: int

    def as_tuple(self) -> tuple:
        return (self.review_length, self.summary_length, self.helpfulness_ratio,
                self.reviewer_frequency)


def reviewer_counts(records: Sequence[ReviewRecord]) -> Counter:
    return Counter(r.reviewer_id for r in records)


def behavioral_features(record: ReviewRecord, reviewer_counts: Mapping[str, int],
                        review_tokens: Sequence[str] | None = None,
                        summary_tokens: Sequence[str] | None = None) -> BehavioralFeatures:
    """Derive the four numeric features for one review.

    Lengths count tokens before stop-word removal. Pass already computed
    token lists to skip re-tokenising. Reviewers missing from
    ``reviewer_counts`` get frequency 0.
    """
    if review_tokens is None:
        review_tokens = tokenize(record.review_text)
    if summary_tokens is None:
        summary_tokens = tokenize(record.summary)
    ratio = record.helpful_votes / record.total_votes if record.total_votes else 0.0
    return BehavioralFeatures(
        review_length=len(review_tokens),
        summary_length=len(summary_tokens),
        helpfulness_ratio=ratio,
        reviewer_frequency=int(reviewer_counts.get(record.reviewer_id, 0)),
    )


def behavioral_array(features: Sequence[BehavioralFeatures]) -> np.ndarray:
    if not len(features):
        return np.zeros((0, len(BEHAVIORAL_COLUMNS)))
    return np.array([f.as_tuple() for f in features], dtype=np.float64)


# --------------------------------------------------------------------------- scaling

@dataclass(frozen=True)
class MinMaxBounds:
    """Per-column training minima and maxima for the behavioural block."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, values: np.ndarray) -> "MinMaxBounds":
        values = np.asarray(values, dtype=np.float64)
        if len(values) == 0:
            raise ValueError("cannot fit scaling bounds on an empty block")
        return cls(values.min(axis=0), values.max(axis=0))

    def apply(self, values: np.ndarray) -> np.ndarray:
        # constant training columns map to 0; test values are not clipped
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, (values - self.lo) / safe, 0.0)

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MinMaxBounds":
        return cls(np.asarray(d["lo"], dtype=np.float64), np.asarray(d["hi"], dtype=np.float64))


# --------------------------------------------------------------------------- feature matrix

@dataclass
class FeatureMatrix:
    """Rows of features with detection labels (1 = spam) and column names.

    Backed by a CSR matrix; :attr:`rows` materialises per-row
    :class:`SparseVector` views on demand.
    """

    X: sp.csr_matrix
    labels: np.ndarray
    column_names: list[str]

    def __post_init__(self):
        self.X = sp.csr_matrix(self.X, dtype=np.float64)
        self.X.eliminate_zeros()
        self.X.sort_indices()
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.X.shape[0] != len(self.labels):
            raise ValueError(f"{self.X.shape[0]} rows but {len(self.labels)} labels")
        if self.X.shape[1] != len(self.column_names):
            raise ValueError(f"{self.X.shape[1]} columns but {len(self.column_names)} names")

    @classmethod
    def from_rows(cls, rows: Sequence[SparseVector], labels, column_names=None) -> "FeatureMatrix":
        X = _stack_rows(rows)
        if column_names is None:
            column_names = [f"f{i}" for i in range(X.shape[1])]
        return cls(X, labels, list(column_names))

    @classmethod
    def from_dense(cls, dense, labels, column_names=None) -> "FeatureMatrix":
        dense = np.atleast_2d(np.asarray(dense, dtype=np.float64))
        if column_names is None:
            column_names = [f"f{i}" for i in range(dense.shape[1])]
        return cls(sp.csr_matrix(dense), labels, list(column_names))

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    def row(self, i: int) -> SparseVector:
        return SparseVector.from_csr_row(self.X, i)

    @property
    def rows(self) -> list[SparseVector]:
        return [self.row(i) for i in range(self.n_rows)]

    def select_columns(self, columns: Sequence[int]) -> "FeatureMatrix":
        columns = list(columns)
        return FeatureMatrix(self.X[:, columns], self.labels,
                             [self.column_names[c] for c in columns])

    def subset_rows(self, rows) -> "FeatureMatrix":
        return FeatureMatrix(self.X[rows], self.labels[rows], self.column_names)


def _stack_rows(rows) -> sp.csr_matrix:
    if sp.issparse(rows):
        return sp.csr_matrix(rows)
    rows = list(rows)
    if not rows:
        return sp.csr_matrix((0, 0))
    dims = {r.dimension for r in rows}
    if len(dims) != 1:
        raise ValueError(f"rows have differing dimensions {sorted(dims)}")
    indptr = np.cumsum([0] + [len(r.indices) for r in rows])
    indices = np.concatenate([r.indices for r in rows])
    data = np.concatenate([r.values for r in rows])
    return sp.csr_matrix((data, indices, indptr), shape=(len(rows), dims.pop()))


def assemble_matrix(text_vectors, behavioral, labels, selected: Sequence[int] | None = None,
                    bounds: MinMaxBounds | None = None,
                    text_names: Sequence[str] | None = None) -> FeatureMatrix:
    """Join TF-IDF rows and the min-max scaled behavioural block.

    ``labels`` are dataset labels (0 = spam) and are flipped to detection
    labels here. ``bounds`` should come from the training rows; when omitted
    they are fitted on ``behavioral`` itself. ``selected`` indexes the full
    ``[text..., behavioural...]`` column space.
    """
    text = _stack_rows(text_vectors)
    beh = behavioral if isinstance(behavioral, np.ndarray) else behavioral_array(behavioral)
    beh = np.asarray(beh, dtype=np.float64).reshape(-1, len(BEHAVIORAL_COLUMNS))
    labels = np.asarray(labels)
    if not (text.shape[0] == beh.shape[0] == len(labels)):
        raise ValueError(
            f"length mismatch: {text.shape[0]} text rows, {beh.shape[0]} behavioural rows, "
            f"{len(labels)} labels")
    if bounds is None:
        bounds = MinMaxBounds.fit(beh)
    scaled = bounds.apply(beh)

    if text_names is None:
        text_names = [f"term_{i}" for i in range(text.shape[1])]
    elif len(text_names) != text.shape[1]:
        raise ValueError("text_names does not match text dimension")
    names = list(text_names) + list(BEHAVIORAL_COLUMNS)
    X = sp.hstack([text, sp.csr_matrix(scaled)], format="csr")

    if selected is not None:
        selected = [int(c) for c in selected]
        bad = [c for c in selected if not 0 <= c < len(names)]
        if bad:
            raise IndexError(f"selected columns out of range: {bad}")
        X = X[:, selected]
        names = [names[c] for c in selected]
    return FeatureMatrix(X, to_internal_labels(labels), names)


# --------------------------------------------------------------------------- chi-square

@dataclass(frozen=True)
class ChiSquareScore:
    column: int
    score: float


def chi_square_array(X, labels) -> np.ndarray:
    """Chi-square statistic of every column against a binary label.

    Each value ``x`` in [0, 1] is treated as ``x`` units of feature presence
    and ``1 - x`` units of absence, giving a soft 2x2 table per column; for
    0/1 features this is exactly the ordinary contingency-table statistic.
    """
    X = sp.csc_matrix(X, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.shape[0] != len(y):
        raise ValueError("label length does not match row count")
    n1 = float(y.sum())
    n = float(len(y))
    n0 = n - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("chi-square needs both classes present")
    if X.nnz and (X.data.min() < -1e-12 or X.data.max() > 1 + 1e-12):
        raise ValueError("chi-square features must lie in [0, 1]")

    a = X.T @ y  # presence mass in class 1
    present = np.asarray(X.sum(axis=0)).ravel()
    b = present - a  # presence mass in class 0
    c = n1 - a
    d = n0 - b
    absent = n - present

    score = np.zeros(X.shape[1])
    for observed, row_total, cls_total in ((a, present, n1), (b, present, n0),
                                           (c, absent, n1), (d, absent, n0)):
        expected = row_total * cls_total / n
        ok = expected > 0
        score[ok] += (observed[ok] - expected[ok]) ** 2 / expected[ok]
    return score


def chi_square_scores(matrix: FeatureMatrix) -> list[ChiSquareScore]:
    return [ChiSquareScore(i, float(s)) for i, s in enumerate(chi_square_array(matrix.X, matrix.labels))]


def select_top_k(scores: Sequence[ChiSquareScore], k: int) -> list[int]:
    """Columns of the ``k`` best scores (ties to the lower column), ascending."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ranked = sorted(scores, key=lambda s: (-s.score, s.column))
    return sorted(s.column for s in ranked[:k])


def write_chi_square_csv(scores: Sequence[ChiSquareScore], column_names: Sequence[str], path) -> None:
    ranked = sorted(scores, key=lambda s: (-s.score, s.column))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "column", "name", "chi_square"])
        for rank, s in enumerate(ranked, 1):
            w.writerow([rank, s.column, column_names[s.column], repr(s.score)])


# --------------------------------------------------------------------------- correlation

@dataclass
class CorrelationMatrix:
    variable_names: list[str]
    values: np.ndarray
    constant: list[str]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["variable", *self.variable_names])
            for name, row in zip(self.variable_names, self.values):
                w.writerow([name, *(f"{v:.6f}" for v in row)])


def pearson_correlation_matrix(variables: Mapping[str, Sequence[float]]) -> CorrelationMatrix:
    """Pairwise Pearson coefficients.

    A constant variable correlates 0 with everything else and 1 with itself;
    such variables are listed in ``constant``.
    """
    names = list(variables)
    lengths = {len(variables[k]) for k in names}
    if len(lengths) > 1:
        raise ValueError(f"variables have differing lengths {sorted(lengths)}")
    n = lengths.pop() if lengths else 0
    if n < 2:
        raise ValueError("need at least two observations")
    data = np.array([np.asarray(variables[k], dtype=np.float64) for k in names])
    centered = data - data.mean(axis=1, keepdims=True)
    ss = np.einsum("ij,ij->i", centered, centered)
    const = ss == 0
    denom = np.sqrt(np.outer(ss, ss))
    cov = centered @ centered.T
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, cov / np.where(denom > 0, denom, 1.0), 0.0)
    r = np.clip((r + r.T) / 2, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(names, r, [nm for nm, c in zip(names, const) if c])


def correlation_variables(records: Sequence[ReviewRecord], behavioral: np.ndarray) -> dict:
    """The variables of the corpus correlation heat map, keyed by name."""
    out = {
        "label": [r.label for r in records],
        "rating": [r.rating for r in records],
        "unix_review_time": [r.unix_review_time for r in records],
    }
    for j, name in enumerate(BEHAVIORAL_COLUMNS):
        out[name] = behavioral[:, j]
    return out
