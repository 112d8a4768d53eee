"""
From review text to a feature matrix
====================================

Tokenise, drop stop words, weight by TF-IDF and rank columns by chi-square.
"""

from revspam.featurize import Featurizer
from revspam.synthetic import SyntheticSpec, generate
from revspam.textproc import build_vocabulary, fit_idf, preprocess, tokenize, transform

print(tokenize("This phone case is great."))
print(preprocess("This phone case is great."))  # ['phone', 'case', 'great']

# a three-document corpus is enough to see the idf at work: "case" appears
# everywhere so it weighs less than "great"
docs = [preprocess(t) for t in ["This phone case is great.",
                                "The case cracked after a week.",
                                "Great value, great case!"]]
model = fit_idf(build_vocabulary(docs, min_df=1))
for term, idf in zip(model.vocabulary.terms, model.idf):
    print(f"{term:>8}  idf={idf:.3f}")

v = transform(docs[2], model)
terms = [model.vocabulary.terms[i] for i in v.indices]
print(dict(zip(terms, v.values.round(3).tolist())), "norm", round(v.norm(), 12))

# on a generated corpus, keep the 50 best text columns plus the behavioural ones
records = generate(SyntheticSpec(n_reviews=2000, vocabulary_size=500, seed=1))
featurizer, matrix, scores = Featurizer.fit(records, text_k=50)
print(matrix.X.shape, "nonzeros:", matrix.X.nnz)

names = featurizer.tfidf.vocabulary.terms + list(matrix.column_names[-4:])
for s in sorted(scores, key=lambda s: -s.score)[:8]:
    print(f"{names[s.column]:>20}  chi2={s.score:8.2f}")
