"""Loading, validation, cleaning and splitting of JSON-lines review corpora."""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from itertools import islice
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from revspam._parallel import parallel_map

GZIP_MAGIC = b"\x1f\x8b"
CHUNK_LINES = 20_000

SPAM = 0
NON_SPAM = 1


class CorpusError(Exception):
    """Raised for unreadable input or, under the abort policy, a bad line."""


class ParseError(ValueError):
    def __init__(self, reason: str, line_number: int | None = None):
        self.reason = reason
        self.line_number = line_number
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(where + reason)


@dataclass(frozen=True, slots=True)
class ReviewRecord:
    reviewer_id: str
    product_id: str
    review_text: str
    summary: str
    rating: int
    helpful_votes: int
    total_votes: int
    unix_review_time: int
    label: int  # 0 = spam, 1 = non-spam

    def to_json(self) -> dict:
        """Render back into the input wire format."""
        return {
            "reviewerID": self.reviewer_id,
            "asin": self.product_id,
            "reviewText": self.review_text,
            "summary": self.summary,
            "overall": self.rating,
            "helpful": [self.helpful_votes, self.total_votes],
            "unixReviewTime": self.unix_review_time,
            "class": self.label,
        }

    @property
    def dedup_key(self) -> tuple:
        return (self.reviewer_id, self.product_id, self.unix_review_time, self.review_text)


@dataclass
class CorpusStats:
    total_read: int = 0
    kept: int = 0
    dropped_null: int = 0
    dropped_duplicate: int = 0
    dropped_malformed: int = 0
    errors: list = field(default_factory=list, repr=False, compare=False)

    def check(self) -> None:
        dropped = self.dropped_null + self.dropped_duplicate + self.dropped_malformed
        assert self.total_read == self.kept + dropped, self

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("errors")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 42
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


# --------------------------------------------------------------------------- parsing

def _require(obj: dict, key: str):
    if key not in obj:
        raise ParseError(f"missing required field {key!r}")
    return obj[key]


def _as_int(value, name: str) -> int:
    # bool is an int subclass; a JSON true is not a count
    if isinstance(value, bool):
        raise ParseError(f"field {name!r} must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            pass
    raise ParseError(f"field {name!r} must be an integer, got {value!r}")


def _as_text(value, name: str) -> str:
    if value is None:
        return ""
    if not isinstance(value, str):
        raise ParseError(f"field {name!r} must be a string")
    return value


def _as_id(value, name: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise ParseError(f"field {name!r} must be a non-empty string")
    return value


def parse_line(line: str | bytes) -> ReviewRecord:
    """Parse and validate one JSON-lines review.

    Unknown fields (``reviewerName``, ``category`` and the like) are ignored.
    A JSON ``null`` review text or summary is read as the empty string so that
    :func:`clean` can account for it as a null value.

    Raises
    ------
    ParseError
        On malformed JSON, a missing required field, a rating outside 1..5 or
        helpful votes exceeding the total.
    """
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"malformed JSON ({exc.msg if hasattr(exc, 'msg') else exc})") from None
    if not isinstance(obj, dict):
        raise ParseError("record is not a JSON object")

    reviewer_id = _as_id(_require(obj, "reviewerID"), "reviewerID")
    product_id = _as_id(_require(obj, "asin"), "asin")
    review_text = _as_text(_require(obj, "reviewText"), "reviewText")
    summary = _as_text(_require(obj, "summary"), "summary")
    rating = _as_int(_require(obj, "overall"), "overall")
    helpful = _require(obj, "helpful")
    unix_time = _as_int(_require(obj, "unixReviewTime"), "unixReviewTime")
    label = _as_int(_require(obj, "class"), "class")

    if not isinstance(helpful, list) or len(helpful) != 2:
        raise ParseError("field 'helpful' must be a two-element array")
    helpful_votes = _as_int(helpful[0], "helpful")
    total_votes = _as_int(helpful[1], "helpful")
    if helpful_votes < 0 or total_votes < 0:
        raise ParseError("helpfulness votes must be non-negative")
    if helpful_votes > total_votes:
        raise ParseError(f"helpful votes {helpful_votes} exceed total votes {total_votes}")
    if not 1 <= rating <= 5:
        raise ParseError(f"rating {rating} outside 1..5")
    if label not in (0, 1):
        raise ParseError(f"class label {label} is not 0 or 1")

    return ReviewRecord(
        reviewer_id=reviewer_id,
        product_id=product_id,
        review_text=review_text,
        summary=summary,
        rating=rating,
        helpful_votes=helpful_votes,
        total_votes=total_votes,
        unix_review_time=unix_time,
        label=label,
    )


def _parse_chunk(args: tuple[int, list[bytes]]) -> list:
    first_line, lines = args
    out = []
    for offset, raw in enumerate(lines):
        try:
            out.append(parse_line(raw))
        except ParseError as exc:
            exc.line_number = first_line + offset
            out.append(ParseError(exc.reason, exc.line_number))
    return out


# --------------------------------------------------------------------------- loading

def open_corpus(path: str | Path) -> io.BufferedIOBase:
    """Open a corpus file for binary reading, transparently gunzipping."""
    path = Path(path)
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc.strerror}") from exc
    magic = fh.peek(2)[:2] if hasattr(fh, "peek") else b""
    if magic == GZIP_MAGIC:
        return gzip.GzipFile(fileobj=fh, mode="rb")
    return fh


def _numbered_chunks(lines: Iterable[bytes], size: int) -> Iterator[tuple[int, list[bytes]]]:
    it = iter(lines)
    first = 1
    while True:
        chunk = [ln.rstrip(b"\r\n") for ln in islice(it, size)]
        if not chunk:
            return
        yield first, chunk
        first += len(chunk)


def iter_records(path: str | Path, on_error: str = "skip", workers: int = 1,
                 stats: CorpusStats | None = None, digest=None) -> Iterator[ReviewRecord]:
    """Stream parsed records in file order, tallying into ``stats``.

    Lines are parsed in chunks of ``CHUNK_LINES``; with ``workers > 1`` the
    chunks are parsed in worker processes and reassembled in file order.
    ``digest`` (a hashlib object) is fed every raw line including its newline.
    """
    if on_error not in ("skip", "abort"):
        raise ValueError(f"on_error must be 'skip' or 'abort', got {on_error!r}")
    stats = stats if stats is not None else CorpusStats()

    with open_corpus(path) as fh:
        raw_lines: Iterable[bytes] = fh
        if digest is not None:
            raw_lines = _feed(fh, digest)
        chunks = _numbered_chunks(raw_lines, CHUNK_LINES)
        try:
            for parsed in parallel_map(_parse_chunk, chunks, workers=workers):
                for item in parsed:
                    stats.total_read += 1
                    if isinstance(item, ParseError):
                        if on_error == "abort":
                            raise CorpusError(str(item))
                        stats.dropped_malformed += 1
                        if len(stats.errors) < 100:
                            stats.errors.append(str(item))
                        continue
                    stats.kept += 1
                    yield item
        except (OSError, EOFError) as exc:
            raise CorpusError(f"cannot read {path}: {exc}") from exc


def _feed(lines: Iterable[bytes], digest) -> Iterator[bytes]:
    for ln in lines:
        digest.update(ln)
        yield ln


def load_corpus(path: str | Path, on_error: str = "skip", workers: int = 1,
                ) -> tuple[list[ReviewRecord], CorpusStats]:
    """Read a whole corpus file into memory.

    >>> records, stats = load_corpus("reviews.jsonl.gz")   # doctest: +SKIP
    """
    stats = CorpusStats()
    records = list(iter_records(path, on_error=on_error, workers=workers, stats=stats))
    stats.check()
    return records, stats


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


# --------------------------------------------------------------------------- cleaning

def clean(records: Sequence[ReviewRecord]) -> tuple[list[ReviewRecord], CorpusStats]:
    """Drop empty-text reviews and verbatim duplicates, keeping first occurrences."""
    stats = CorpusStats(total_read=len(records))
    seen: set[tuple] = set()
    out = []
    for rec in records:
        if not rec.review_text.strip():
            stats.dropped_null += 1
            continue
        key = rec.dedup_key
        if key in seen:
            stats.dropped_duplicate += 1
            continue
        seen.add(key)
        out.append(rec)
    stats.kept = len(out)
    stats.check()
    return out, stats


# --------------------------------------------------------------------------- splitting

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(records: Sequence[ReviewRecord], spec: SplitSpec = SplitSpec(),
          ) -> tuple[list[ReviewRecord], list[ReviewRecord]]:
    """Seeded train/test partition; both halves keep input order.

    In stratified mode each class contributes ``round(fraction * n_class)``
    records to the training side.
    """
    n = len(records)
    rng = np.random.default_rng(spec.seed)
    in_train = np.zeros(n, dtype=bool)
    if spec.stratified:
        labels = np.fromiter((r.label for r in records), dtype=np.int64, count=n)
        for cls in (0, 1):
            members = np.flatnonzero(labels == cls)
            if len(members) < 2:
                raise ValueError(f"class {cls} has fewer than 2 members; cannot stratify")
            perm = rng.permutation(members)
            in_train[perm[:_round_half_up(spec.train_fraction * len(members))]] = True
    else:
        perm = rng.permutation(n)
        in_train[perm[:_round_half_up(spec.train_fraction * n)]] = True
    train = [r for r, t in zip(records, in_train) if t]
    test = [r for r, t in zip(records, in_train) if not t]
    return train, test


def write_jsonl(records: Iterable[ReviewRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
