"""Bagged and boosted tree ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from revspam._parallel import parallel_map
from revspam.models.tree import Presorted, Tree, grow_tree


@dataclass
class Ensemble:
    kind: str  # "bagged" or "boosted"
    trees: list[Tree]
    learning_rate: float = 1.0
    base_score: float = 0.0

    def tree_scores(self, X) -> np.ndarray:
        """Per-tree outputs, shape (n_trees, n_rows)."""
        return np.array([t.predict(X) for t in self.trees])

    def predict(self, X) -> np.ndarray:
        if self.kind == "bagged":
            return self.tree_scores(X).mean(axis=0)
        raw = np.full(X.shape[0], self.base_score)
        for t in self.trees:
            raw += self.learning_rate * t.predict(X)
        return expit(raw)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "learning_rate": self.learning_rate,
                "base_score": self.base_score, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "Ensemble":
        return cls(d["kind"], [Tree.from_dict(t) for t in d["trees"]],
                   float(d["learning_rate"]), float(d["base_score"]))


def subset_size(ratio: float | None, n_cols: int) -> int:
    """Columns tried per node: ``ceil(ratio * n_cols)``, or ``ceil(sqrt(n_cols))``."""
    if ratio is None:
        return max(1, math.ceil(math.sqrt(n_cols)))
    return min(n_cols, max(1, math.ceil(ratio * n_cols - 1e-9)))


@dataclass
class _ForestJob:
    pre: Presorted
    y: np.ndarray
    seed: int
    tree_ids: list[int]
    max_depth: int
    min_samples_leaf: int
    n_sub: int
    bootstrap: bool
    trees: list = field(default_factory=list)


def _bootstrap_weights(seed: int, tree_id: int, n: int) -> np.ndarray:
    draw = np.random.default_rng([seed, tree_id]).integers(0, n, size=n)
    return np.bincount(draw, minlength=n).astype(np.float64)


def _grow_forest_part(job: _ForestJob) -> list[Tree]:
    n, V = job.pre.n_rows, job.pre.n_cols
    trees = []
    for t in job.tree_ids:
        weight = _bootstrap_weights(job.seed, t, n) if job.bootstrap else None
        sampler = None
        if job.n_sub < V:
            def sampler(heap_id, t=t):
                rng = np.random.default_rng([job.seed, t, heap_id])
                return np.sort(rng.choice(V, size=job.n_sub, replace=False))
        tree, _ = grow_tree(job.pre, job.y, weight, max_depth=job.max_depth,
                            min_samples_leaf=job.min_samples_leaf, feature_sampler=sampler)
        trees.append(tree)
    return trees


def fit_forest(X, y, *, n_trees: int, max_depth: int, min_samples_leaf: int,
               feature_ratio: float | None, bootstrap: bool, seed: int,
               workers: int = 1) -> Ensemble:
    """Random forest of CART trees averaged at prediction time.

    Tree ``t`` draws its bootstrap sample from ``default_rng([seed, t])`` and
    the column subset of node ``h`` from ``default_rng([seed, t, h])``, so the
    forest is the same whatever ``workers`` is.
    """
    pre = Presorted(X)
    y = np.asarray(y, dtype=np.float64)
    n_sub = subset_size(feature_ratio, pre.n_cols)
    parts = max(1, min(workers, n_trees))
    ids = np.array_split(np.arange(n_trees), parts)
    jobs = [_ForestJob(pre, y, seed, [int(i) for i in part], max_depth, min_samples_leaf,
                       n_sub, bootstrap) for part in ids]
    trees = [t for part in parallel_map(_grow_forest_part, jobs, workers=parts) for t in part]
    return Ensemble("bagged", trees)


def log_loss(y: np.ndarray, raw: np.ndarray) -> float:
    return float(-np.mean(np.where(y > 0, log_expit(raw), log_expit(-raw))))


def fit_boosting(X, y, *, n_rounds: int, learning_rate: float, max_depth: int,
                 min_samples_leaf: int) -> tuple[Ensemble, list[float]]:
    """Gradient boosting on logistic loss with mean-residual regression leaves.

    Returns the ensemble and the training log-loss before the first and after
    every round.
    """
    y = np.asarray(y, dtype=np.float64)
    rate = y.mean()
    if not 0.0 < rate < 1.0:
        raise FloatingPointError("base log-odds is infinite for a single-class training set")
    base = math.log(rate / (1.0 - rate))
    pre = Presorted(X)
    raw = np.full(len(y), base)
    history = [log_loss(y, raw)]
    trees = []
    for _ in range(n_rounds):
        resid = y - expit(raw)
        tree, leaf = grow_tree(pre, resid, max_depth=max_depth, min_samples_leaf=min_samples_leaf)
        raw = raw + learning_rate * tree.value[leaf]
        trees.append(tree)
        history.append(log_loss(y, raw))
    return Ensemble("boosted", trees, learning_rate, base), history
