"""Fit-on-train, apply-anywhere feature extraction for review records."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from revspam._parallel import parallel_map
from revspam.corpus import ReviewRecord
from revspam.features import (
    BEHAVIORAL_COLUMNS,
    DEFAULT_TEXT_K,
    FeatureMatrix,
    MinMaxBounds,
    assemble_matrix,
    chi_square_array,
    ChiSquareScore,
    reviewer_counts,
    select_top_k,
)
from revspam.textproc import (
    DEFAULT_MAX_TERMS,
    DEFAULT_MIN_DF,
    TfIdfModel,
    build_vocabulary,
    default_stopwords,
    fit_idf,
    tokenize,
    transform_many,
)

FEATURIZER_FORMAT = "revspam-featurizer"
FEATURIZER_VERSION = 1
TOKENIZE_CHUNK = 10_000


def _tokenize_chunk(records: Sequence[ReviewRecord]):
    stop = default_stopwords()
    out = []
    for r in records:
        body = tokenize(r.review_text)
        summ = tokenize(r.summary)
        # text and summary joined by a space tokenise to body + summ
        doc = [t for t in body if t not in stop] + [t for t in summ if t not in stop]
        out.append((len(body), len(summ), doc))
    return out


def tokenize_records(records: Sequence[ReviewRecord], workers: int = 1):
    """Per record: (review token count, summary token count, filtered tokens)."""
    chunks = (records[i:i + TOKENIZE_CHUNK] for i in range(0, len(records), TOKENIZE_CHUNK))
    if workers <= 1 or len(records) <= TOKENIZE_CHUNK:
        return _tokenize_chunk(records)
    return [item for part in parallel_map(_tokenize_chunk, chunks, workers=workers) for item in part]


def behavioral_block(records, lengths, counts) -> np.ndarray:
    out = np.empty((len(records), len(BEHAVIORAL_COLUMNS)))
    for i, (r, (n_body, n_summ, _)) in enumerate(zip(records, lengths)):
        out[i, 0] = n_body
        out[i, 1] = n_summ
        out[i, 2] = r.helpful_votes / r.total_votes if r.total_votes else 0.0
        out[i, 3] = counts.get(r.reviewer_id, 0)
    return out


@dataclass
class Featurizer:
    tfidf: TfIdfModel
    selected: list[int]
    bounds: MinMaxBounds
    reviewer_counts: dict[str, int]
    column_names: list[str]

    @classmethod
    def fit(cls, records: Sequence[ReviewRecord], max_terms: int = DEFAULT_MAX_TERMS,
            min_df: int = DEFAULT_MIN_DF, text_k: int = DEFAULT_TEXT_K, workers: int = 1,
            ) -> tuple["Featurizer", FeatureMatrix, list[ChiSquareScore]]:
        """Fit vocabulary, idf, scaling bounds and chi-square selection on ``records``.

        Keeps the ``text_k`` best TF-IDF columns plus all behavioural columns.
        Returns the featurizer, the training matrix and the chi-square scores
        of every column of the unselected matrix.
        """
        toks = tokenize_records(records, workers)
        docs = [doc for _, _, doc in toks]
        tfidf = fit_idf(build_vocabulary(docs, max_terms=max_terms, min_df=min_df,
                                         workers=workers))
        counts = dict(reviewer_counts(records))
        beh = behavioral_block(records, toks, counts)
        bounds = MinMaxBounds.fit(beh)
        labels = [r.label for r in records]
        full = assemble_matrix(transform_many(docs, tfidf), beh, labels, bounds=bounds,
                               text_names=tfidf.vocabulary.terms)
        V = tfidf.dimension
        raw = chi_square_array(full.X, full.labels)
        scores = [ChiSquareScore(i, float(s)) for i, s in enumerate(raw)]
        text_cols = select_top_k(scores[:V], text_k) if V else []
        selected = text_cols + list(range(V, V + len(BEHAVIORAL_COLUMNS)))
        matrix = full.select_columns(selected)
        return cls(tfidf, selected, bounds, counts, matrix.column_names), matrix, scores

    def transform(self, records: Sequence[ReviewRecord], workers: int = 1) -> FeatureMatrix:
        toks = tokenize_records(records, workers)
        beh = behavioral_block(records, toks, self.reviewer_counts)
        text = transform_many([doc for _, _, doc in toks], self.tfidf)
        return assemble_matrix(text, beh, [r.label for r in records], selected=self.selected,
                               bounds=self.bounds, text_names=self.tfidf.vocabulary.terms)

    @property
    def dimension(self) -> int:
        return len(self.selected)

    def to_dict(self) -> dict:
        return {
            "format": FEATURIZER_FORMAT,
            "version": FEATURIZER_VERSION,
            "tfidf": self.tfidf.to_dict(),
            "selected": self.selected,
            "bounds": self.bounds.to_dict(),
            "reviewer_counts": dict(sorted(self.reviewer_counts.items())),
            "column_names": self.column_names,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Featurizer":
        if d.get("format") != FEATURIZER_FORMAT or d.get("version") != FEATURIZER_VERSION:
            raise ValueError("not a version-1 featurizer document")
        return cls(TfIdfModel.from_dict(d["tfidf"]), list(d["selected"]),
                   MinMaxBounds.from_dict(d["bounds"]), Counter(d["reviewer_counts"]),
                   list(d["column_names"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Featurizer":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
