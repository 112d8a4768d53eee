"""Monthly review volume and reviewer-frequency segments."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from revspam.corpus import SPAM, ReviewRecord

DEFAULT_BOUNDS = (1, 5)
SEGMENT_NAMES = ("one_time", "occasional", "frequent")


@dataclass(frozen=True)
class TimeSeriesPoint:
    year: int
    month: int
    total_reviews: int
    spam_reviews: int


@dataclass(frozen=True)
class ReviewerSegment:
    name: str
    lower: int  # inclusive
    upper: int | None  # inclusive; None for unbounded
    reviewer_count: int
    review_count: int
    spam_reviews: int

    @property
    def spam_rate(self) -> float | None:
        return self.spam_reviews / self.review_count if self.review_count else None


def monthly_series(records: Sequence[ReviewRecord]) -> list[TimeSeriesPoint]:
    """Review and spam counts per UTC calendar month, with empty months filled in."""
    if not records:
        return []
    secs = np.fromiter((r.unix_review_time for r in records), dtype=np.int64, count=len(records))
    months = secs.astype("datetime64[s]").astype("datetime64[M]").astype(np.int64)
    spam = np.fromiter((r.label == SPAM for r in records), dtype=bool, count=len(records))
    first, last = int(months.min()), int(months.max())
    offset = months - first
    totals = np.bincount(offset, minlength=last - first + 1)
    spams = np.bincount(offset, weights=spam, minlength=last - first + 1).astype(np.int64)
    out = []
    for i, (t, s) in enumerate(zip(totals, spams)):
        m = first + i  # months since 1970-01
        out.append(TimeSeriesPoint(1970 + m // 12, m % 12 + 1, int(t), int(s)))
    return out


def segment_reviewers(records: Sequence[ReviewRecord], bounds: tuple[int, int] = DEFAULT_BOUNDS,
                      ) -> list[ReviewerSegment]:
    """Bucket reviewers by review count: ``[1, a]``, ``(a, b]`` and ``(b, inf)``.

    A segment's spam rate is the share of spam among all reviews written by
    its members (None for an empty segment).
    """
    a, b = bounds
    if not 1 <= a < b:
        raise ValueError(f"bounds must satisfy 1 <= a < b, got {bounds}")
    per_reviewer: Counter = Counter()
    spam_per_reviewer: Counter = Counter()
    for r in records:
        per_reviewer[r.reviewer_id] += 1
        if r.label == SPAM:
            spam_per_reviewer[r.reviewer_id] += 1

    spans = ((1, a), (a + 1, b), (b + 1, None))
    tallies = [[0, 0, 0] for _ in spans]  # reviewers, reviews, spam
    for rid, n in per_reviewer.items():
        i = 0 if n <= a else 1 if n <= b else 2
        tallies[i][0] += 1
        tallies[i][1] += n
        tallies[i][2] += spam_per_reviewer[rid]
    return [ReviewerSegment(name, lo, hi, *t)
            for name, (lo, hi), t in zip(SEGMENT_NAMES, spans, tallies)]


def write_series_csv(points: Sequence[TimeSeriesPoint], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "year", "month", "total_reviews", "spam_reviews"])
        for p in points:
            w.writerow([f"{p.year:04d}-{p.month:02d}", p.year, p.month, p.total_reviews,
                        p.spam_reviews])


def write_segments_csv(segments: Sequence[ReviewerSegment], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segment", "min_reviews", "max_reviews", "reviewer_count", "review_count",
                    "spam_reviews", "spam_rate"])
        for s in segments:
            rate = "NA" if s.spam_rate is None else f"{s.spam_rate:.6f}"
            w.writerow([s.name, s.lower, "" if s.upper is None else s.upper, s.reviewer_count,
                        s.review_count, s.spam_reviews, rate])
