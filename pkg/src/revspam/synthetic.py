"""Seeded generator of labelled Amazon-style review corpora.

Spam and genuine reviews draw words from overlapping but different
distributions and differ in length, rating, helpfulness and how many reviews
their authors write. Used by the tests, the benchmarks and the demos.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from revspam.corpus import NON_SPAM, SPAM, ReviewRecord

_ONSETS = ["b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v",
           "w", "z", "br", "ch", "cl", "dr", "fl", "gr", "pl", "pr", "sh", "st", "tr", "th"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ea", "oo", "ou"]
_CODAS = ["", "n", "r", "s", "t", "l", "m", "ck", "nd", "st"]

_FILLER = ["the", "this", "is", "a", "and", "it", "i", "my", "for", "with", "was", "to", "of",
           "very", "but", "so", "on", "in", "that", "not"]

START_TIME = 1_325_376_000  # 2012-01-01
SPAN_SECONDS = 3 * 365 * 86_400


def _word_list(rng: np.random.Generator, n: int) -> list[str]:
    words: set[str] = set()
    while len(words) < n:
        syll = rng.integers(1, 4)
        w = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) + rng.choice(_CODAS)
                    for _ in range(syll))
        if len(w) >= 3:
            words.add(w)
    return sorted(words)


@dataclass(frozen=True)
class SyntheticSpec:
    n_reviews: int = 20_000
    spam_fraction: float = 0.35
    vocabulary_size: int = 3000
    # share of topical words shared by both classes; the rest lean one way
    overlap: float = 0.6
    # how strongly class-leaning words are preferred by their own class
    lean: float = 3.0
    mean_length: float = 28.0
    seed: int = 7


def generate(spec: SyntheticSpec = SyntheticSpec()) -> list[ReviewRecord]:
    rng = np.random.default_rng(spec.seed)
    words = np.array(_word_list(rng, spec.vocabulary_size))
    V = len(words)

    # Zipf-like base popularity, then tilt words towards one class
    base = 1.0 / np.arange(1, V + 1) ** 0.9
    rng.shuffle(base)
    side = rng.random(V)
    shared = side < spec.overlap
    spam_leaning = ~shared & (side < spec.overlap + (1 - spec.overlap) / 2)
    genuine_leaning = ~shared & ~spam_leaning
    p_spam = base * np.where(spam_leaning, spec.lean, np.where(genuine_leaning, 1 / spec.lean, 1))
    p_genuine = base * np.where(genuine_leaning, spec.lean, np.where(spam_leaning, 1 / spec.lean, 1))
    p_spam /= p_spam.sum()
    p_genuine /= p_genuine.sum()

    cdf_spam = np.cumsum(p_spam)
    cdf_genuine = np.cumsum(p_genuine)

    n = spec.n_reviews
    is_spam = rng.random(n) < spec.spam_fraction
    n_products = max(10, n // 20)

    # half of all spam comes from a pool of prolific accounts; genuine authors
    # are mostly one-off with a heavy tail of regulars
    spam_pool = max(5, int(n * spec.spam_fraction) // 8)
    regular_pool = max(10, n // 50)

    records = []
    for i in range(n):
        spam = bool(is_spam[i])
        if spam:
            length = max(3, int(rng.poisson(spec.mean_length * 0.7)))
            cdf = cdf_spam
            rating = int(rng.choice([5, 5, 5, 4, 4, 3, 1]))
            total_votes = int(rng.poisson(1.5))
            helpful = int(rng.binomial(total_votes, 0.35))
            if rng.random() < 0.5:
                reviewer = f"S{int(rng.integers(spam_pool)):05d}"
            else:
                reviewer = f"U{i:07d}"
        else:
            length = max(3, int(rng.poisson(spec.mean_length)))
            cdf = cdf_genuine
            rating = int(rng.choice([5, 5, 4, 4, 3, 2, 1]))
            total_votes = int(rng.poisson(3.0))
            helpful = int(rng.binomial(total_votes, 0.6))
            if rng.random() < 0.25:
                reviewer = f"R{int(rng.zipf(1.6)) % regular_pool:05d}"
            else:
                reviewer = f"U{i:07d}"
        body = list(words[np.minimum(np.searchsorted(cdf, rng.random(length)), V - 1)])
        # sprinkle function words so stop-word removal has work to do
        n_fill = int(rng.poisson(length * 0.4))
        for pos in rng.integers(0, len(body) + 1, size=n_fill):
            body.insert(int(pos), _FILLER[int(rng.integers(len(_FILLER)))])
        text = " ".join(body).capitalize() + "."
        summary_len = int(rng.integers(1, 5))
        summary = " ".join(words[np.minimum(np.searchsorted(cdf, rng.random(summary_len)), V - 1)])
        t = START_TIME + int(rng.integers(SPAN_SECONDS))
        records.append(ReviewRecord(
            reviewer_id=reviewer,
            product_id=f"B{int(rng.integers(n_products)):07d}",
            review_text=text,
            summary=summary,
            rating=rating,
            helpful_votes=helpful,
            total_votes=total_votes,
            unix_review_time=t,
            label=SPAM if spam else NON_SPAM,
        ))
    return records


def write_corpus(records, path, compress: bool | None = None, extra_lines=()) -> Path:
    """Write records as JSON lines (gzipped when the name ends in ``.gz``).

    ``extra_lines`` is an iterable of ``(position, raw_line)`` pairs inserted
    verbatim, for exercising malformed-input handling.
    """
    path = Path(path)
    compress = path.suffix == ".gz" if compress is None else compress
    lines = [json.dumps(r.to_json(), sort_keys=True) for r in records]
    for pos, raw in sorted(extra_lines, key=lambda pr: pr[0], reverse=True):
        lines.insert(pos, raw)
    payload = ("\n".join(lines) + "\n").encode("utf-8")
    if compress:
        # mtime=0 keeps the bytes reproducible
        with open(path, "wb") as raw_fh, gzip.GzipFile(fileobj=raw_fh, mode="wb", mtime=0) as fh:
            fh.write(payload)
    else:
        path.write_bytes(payload)
    return path
