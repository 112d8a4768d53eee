import numpy as np
import pytest

from revspam.corpus import NON_SPAM, SPAM, ReviewRecord


def make_record(i=0, *, reviewer=None, text="solid product works well", summary="good",
                rating=5, helpful=(1, 2), time=1_400_000_000, label=NON_SPAM, product=None):
    return ReviewRecord(
        reviewer_id=reviewer or f"R{i}",
        product_id=product or f"P{i}",
        review_text=text,
        summary=summary,
        rating=rating,
        helpful_votes=helpful[0],
        total_votes=helpful[1],
        unix_review_time=time,
        label=label,
    )


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture
def tiny_records():
    """Twenty reviews, half spam, with a few repeat reviewers."""
    rng = np.random.default_rng(3)
    spam_words = ["amazing", "best", "buy", "now", "perfect", "love"]
    ham_words = ["battery", "lasted", "screen", "cracked", "returned", "sturdy"]
    out = []
    for i in range(20):
        spam = i % 2 == 0
        words = rng.choice(spam_words if spam else ham_words, size=6)
        out.append(make_record(
            i, reviewer=f"R{i % 7}", text=" ".join(words), summary=str(words[0]),
            rating=5 if spam else int(rng.integers(1, 6)),
            helpful=(0, 1) if spam else (2, 3),
            time=1_388_534_400 + i * 86_400 * 20,
            label=SPAM if spam else NON_SPAM))
    return out


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
