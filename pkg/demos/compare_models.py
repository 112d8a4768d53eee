"""
Five classifiers on a synthetic review corpus
=============================================

Train logistic regression, a linear SVM, a decision tree, a random forest
and gradient boosting on the same features, then compare them on a
held-out split.
"""

from revspam.corpus import SplitSpec, clean, split
from revspam.evaluation import compare_models, confusion, format_table, metrics
from revspam.featurize import Featurizer
from revspam.models import MODEL_NAMES, default_config, train
from revspam.synthetic import SyntheticSpec, generate

records, _ = clean(generate(SyntheticSpec(n_reviews=8000, seed=3)))
train_recs, test_recs = split(records, SplitSpec(train_fraction=0.8, seed=42))
print(len(train_recs), "train /", len(test_recs), "test")

featurizer, X_train, _ = Featurizer.fit(train_recs, text_k=1000)
X_test = featurizer.transform(test_recs)

# smaller ensembles than the defaults keep this under a minute
configs = {name: default_config(name) for name in MODEL_NAMES}
configs["rf"] = default_config("rf", n_trees=40)
configs["gb"] = default_config("gb", n_trees=40)

reports = []
for name in MODEL_NAMES:
    model = train(name, X_train, configs[name])
    cm = confusion(model.predict_scores(X_test.X), X_test.labels)
    reports.append(metrics(cm, name))
    print(name, cm)

print(format_table(compare_models(reports)))

# the linear models keep their per-epoch training loss
lr = train("lr", X_train, configs["lr"])
print("lr loss by epoch:", [round(x, 4) for x in lr.info["loss_history"][:6]], "...")
