"""
Volume over time, reviewer segments and correlations
====================================================
"""

from revspam.analysis import monthly_series, segment_reviewers
from revspam.featurize import behavioral_block, tokenize_records
from revspam.features import correlation_variables, pearson_correlation_matrix, reviewer_counts
from revspam.synthetic import SyntheticSpec, generate

records = generate(SyntheticSpec(n_reviews=5000, seed=5))

series = monthly_series(records)
for p in series[:6]:
    print(f"{p.year}-{p.month:02d}  {p.total_reviews:4d} reviews  {p.spam_reviews:4d} spam")
print("...", len(series), "months,", sum(p.total_reviews for p in series), "reviews")

# one review, 2 to 5, more than 5
for seg in segment_reviewers(records, bounds=(1, 5)):
    rate = "n/a" if seg.spam_rate is None else f"{seg.spam_rate:.1%}"
    print(f"{seg.name:>10}: {seg.reviewer_count:5d} reviewers, {seg.review_count:5d} reviews, spam {rate}")

beh = behavioral_block(records, tokenize_records(records), reviewer_counts(records))
corr = pearson_correlation_matrix(correlation_variables(records, beh))
width = max(map(len, corr.variable_names))
for name, row in zip(corr.variable_names, corr.values):
    print(f"{name:>{width}}", " ".join(f"{v:+.2f}" for v in row))
