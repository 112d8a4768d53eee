import gzip
import json

import pytest
from hypothesis import given, settings, strategies as st

from revspam import corpus
from revspam.corpus import CorpusError, ParseError, SplitSpec, clean, parse_line, split


def line(**over):
    obj = {"reviewerID": "A1", "asin": "B1", "reviewText": "Nice case.", "summary": "ok",
           "overall": 5.0, "helpful": [1, 2], "unixReviewTime": 1400000000, "class": 1,
           "reviewerName": "someone"}
    obj.update(over)
    return json.dumps(obj)


def test_parse_valid_line_ignores_extra_fields():
    rec = parse_line(line())
    assert rec.rating == 5 and rec.helpful_votes == 1 and rec.total_votes == 2
    assert rec.label == 1


def test_null_text_reads_as_empty():
    assert parse_line(line(reviewText=None)).review_text == ""


@pytest.mark.parametrize("over", [
    {"overall": 6}, {"overall": 0}, {"helpful": [3, 2]}, {"helpful": [1]},
    {"class": 2}, {"overall": True}, {"unixReviewTime": "soon"},
])
def test_parse_rejects_invalid(over):
    with pytest.raises(ParseError):
        parse_line(line(**over))


def test_missing_field():
    obj = json.loads(line())
    del obj["asin"]
    with pytest.raises(ParseError, match="asin"):
        parse_line(json.dumps(obj))


def test_bad_json():
    with pytest.raises(ParseError):
        parse_line("{not json")


def write(tmp_path, lines, gz=False):
    path = tmp_path / ("c.jsonl.gz" if gz else "c.jsonl")
    payload = ("\n".join(lines) + "\n").encode()
    if gz:
        with gzip.open(path, "wb") as fh:
            fh.write(payload)
    else:
        path.write_bytes(payload)
    return path


@pytest.mark.parametrize("gz", [False, True])
def test_load_skip_counts_malformed(tmp_path, gz):
    path = write(tmp_path, [line(), "{oops", line(reviewerID="A2"), line(overall=9)], gz=gz)
    records, stats = corpus.load_corpus(path)
    assert len(records) == 2
    assert stats.total_read == 4 and stats.dropped_malformed == 2 and stats.kept == 2


def test_abort_names_line(tmp_path):
    path = write(tmp_path, [line(), line(), "{oops"])
    with pytest.raises(CorpusError, match="line 3"):
        corpus.load_corpus(path, on_error="abort")


def test_parallel_parse_matches_serial(tmp_path, monkeypatch):
    monkeypatch.setattr(corpus, "CHUNK_LINES", 7)
    lines = [line(reviewerID=f"A{i}") if i % 5 else "bad" for i in range(40)]
    path = write(tmp_path, lines)
    a, sa = corpus.load_corpus(path, workers=1)
    b, sb = corpus.load_corpus(path, workers=3)
    assert a == b and sa == sb


def test_clean_drops_null_and_duplicates(record_factory):
    r = record_factory
    recs = [r(1), r(1), r(2, text="   "), r(3)]
    out, stats = clean(recs)
    assert out == [r(1), r(3)]
    assert (stats.dropped_duplicate, stats.dropped_null, stats.kept) == (1, 1, 2)


def test_three_record_fixture_kept(record_factory):
    out, stats = clean([record_factory(i) for i in range(3)])
    assert stats.kept == 3


records_strategy = st.lists(
    st.tuples(st.integers(0, 5), st.sampled_from(["a b", "c", "", " "]), st.integers(0, 1)),
    max_size=40)


@settings(max_examples=60, deadline=None)
@given(records_strategy)
def test_clean_conserves_and_is_idempotent(rows):
    from conftest import make_record
    recs = [make_record(i, reviewer=f"R{i}", text=t, label=lab) for i, t, lab in rows]
    out, stats = clean(recs)
    assert stats.total_read == stats.kept + stats.dropped_null + stats.dropped_duplicate
    again, stats2 = clean(out)
    assert again == out and stats2.kept == stats.kept


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=4, max_size=200), st.integers(0, 2**31),
       st.floats(0.1, 0.9), st.booleans())
def test_split_partitions(labels, seed, frac, stratified):
    from conftest import make_record
    if stratified and min(labels.count(0), labels.count(1)) < 2:
        return
    recs = [make_record(i, label=lab) for i, lab in enumerate(labels)]
    train, test = split(recs, SplitSpec(frac, seed, stratified))
    assert sorted(train + test, key=lambda r: r.reviewer_id) == sorted(recs, key=lambda r: r.reviewer_id)
    assert not set(train) & set(test)
    assert split(recs, SplitSpec(frac, seed, stratified)) == (train, test)
    if stratified:
        for cls in (0, 1):
            n = labels.count(cls)
            assert sum(r.label == cls for r in train) == int(frac * n + 0.5)


def test_stratified_split_needs_two_per_class(record_factory):
    recs = [record_factory(i, label=1) for i in range(5)] + [record_factory(9, label=0)]
    with pytest.raises(ValueError):
        split(recs)
