"""Training configuration, the uniform model wrapper, and the five trainers."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Union

import numpy as np
import scipy.sparse as sp

from revspam.features import FeatureMatrix
from revspam.models.ensemble import Ensemble, fit_boosting, fit_forest
from revspam.models.linear import DivergenceError, LinearModel, fit_linear
from revspam.models.tree import Tree, fit_tree
from revspam.textproc import SparseVector

MODEL_FORMAT = "revspam-model"
MODEL_VERSION = 1

MODEL_NAMES = ("lr", "svm", "dt", "rf", "gb")


class TrainingError(RuntimeError):
    """Training could not produce a usable model."""


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 42
    epochs: int = 30
    learning_rate: float = 0.1
    l2_penalty: float = 1e-4
    batch_size: int = 256
    max_depth: int = 12
    min_samples_leaf: int = 5
    n_trees: int = 100
    # None means sqrt(V)/V, i.e. ceil(sqrt(V)) columns per node
    feature_subsample_ratio: float | None = None
    bootstrap: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0 or self.l2_penalty < 0:
            raise ValueError("learning_rate must be > 0 and l2_penalty >= 0")
        if min(self.epochs, self.batch_size, self.min_samples_leaf) < 1 or self.max_depth < 0:
            raise ValueError("epochs, batch_size and min_samples_leaf must be >= 1")
        if self.n_trees < 0:
            raise ValueError("n_trees must be >= 0")
        r = self.feature_subsample_ratio
        if r is not None and not 0 < r <= 1:
            raise ValueError("feature_subsample_ratio must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


DEFAULT_CONFIGS = {
    "lr": TrainConfig(learning_rate=0.1, epochs=30, l2_penalty=1e-4, batch_size=256),
    "svm": TrainConfig(learning_rate=0.05, epochs=30, l2_penalty=1e-4, batch_size=256),
    "dt": TrainConfig(max_depth=12, min_samples_leaf=5),
    "rf": TrainConfig(n_trees=100, max_depth=16, min_samples_leaf=1,
                      feature_subsample_ratio=None),
    "gb": TrainConfig(n_trees=100, learning_rate=0.1, max_depth=4, min_samples_leaf=1),
}


def default_config(name: str, **overrides) -> TrainConfig:
    return replace(DEFAULT_CONFIGS[name], **overrides)


Params = Union[LinearModel, Tree, Ensemble]


@dataclass
class TrainedModel:
    """A fitted classifier whose :meth:`predict` returns spam scores in [0, 1]."""

    name: str
    dimension: int
    params: Params
    config: TrainConfig
    threshold: float = 0.5
    info: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        if isinstance(self.params, LinearModel):
            return self.params.kind
        if isinstance(self.params, Tree):
            return "tree"
        return self.params.kind

    def predict_scores(self, X) -> np.ndarray:
        if sp.issparse(X) or isinstance(X, np.ndarray):
            mat = X
        elif isinstance(X, FeatureMatrix):
            mat = X.X
        else:
            raise TypeError(f"cannot score {type(X).__name__}")
        if mat.shape[1] != self.dimension:
            raise ValueError(f"model expects dimension {self.dimension}, got {mat.shape[1]}")
        return self.params.predict(mat)

    def classify(self, X) -> np.ndarray:
        return (self.predict_scores(X) >= self.threshold).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "name": self.name,
            "kind": self.kind,
            "dimension": self.dimension,
            "threshold": self.threshold,
            "config": self.config.to_dict(),
            "info": self.info,
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
            raise ValueError("not a version-1 model document")
        kind = d["kind"]
        if kind in ("logistic", "hinge"):
            params = LinearModel.from_dict(d["params"])
        elif kind == "tree":
            params = Tree.from_dict(d["params"])
        else:
            params = Ensemble.from_dict(d["params"])
        return cls(d["name"], int(d["dimension"]), params, TrainConfig.from_dict(d["config"]),
                   float(d["threshold"]), d.get("info", {}))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "TrainedModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def predict(model: TrainedModel, row: SparseVector) -> float:
    """Spam score of one row; classify positive when it is >= ``model.threshold``."""
    if row.dimension != model.dimension:
        raise ValueError(f"model expects dimension {model.dimension}, got {row.dimension}")
    return float(model.predict_scores(row.to_csr())[0])


# --------------------------------------------------------------------------- trainers

def _check(matrix: FeatureMatrix) -> np.ndarray:
    if matrix.n_rows == 0:
        raise TrainingError("empty training matrix")
    y = matrix.labels
    if not np.isin(y, (0, 1)).all():
        raise TrainingError("labels must be binary")
    if y.min() == y.max():
        raise TrainingError("training set contains a single class")
    return y


def _linear(matrix, config, kind, name) -> TrainedModel:
    y = _check(matrix)
    try:
        params, history = fit_linear(matrix.X, y, kind, learning_rate=config.learning_rate,
                                     epochs=config.epochs, l2_penalty=config.l2_penalty,
                                     batch_size=config.batch_size, seed=config.seed)
    except DivergenceError as exc:
        raise TrainingError(str(exc)) from exc
    return TrainedModel(name, matrix.dimension, params, config, info={"loss_history": history})


def train_logistic(matrix: FeatureMatrix, config: TrainConfig | None = None) -> TrainedModel:
    return _linear(matrix, config or DEFAULT_CONFIGS["lr"], "logistic", "lr")


def train_linear_svm(matrix: FeatureMatrix, config: TrainConfig | None = None) -> TrainedModel:
    return _linear(matrix, config or DEFAULT_CONFIGS["svm"], "hinge", "svm")


def train_decision_tree(matrix: FeatureMatrix, config: TrainConfig | None = None) -> TrainedModel:
    config = config or DEFAULT_CONFIGS["dt"]
    y = _check(matrix)
    tree = fit_tree(matrix.X, y, max_depth=config.max_depth,
                    min_samples_leaf=config.min_samples_leaf)
    return TrainedModel("dt", matrix.dimension, tree, config)


def train_random_forest(matrix: FeatureMatrix, config: TrainConfig | None = None,
                        workers: int = 1) -> TrainedModel:
    config = config or DEFAULT_CONFIGS["rf"]
    y = _check(matrix)
    if config.n_trees < 1:
        raise TrainingError("a forest needs at least one tree")
    forest = fit_forest(matrix.X, y, n_trees=config.n_trees, max_depth=config.max_depth,
                        min_samples_leaf=config.min_samples_leaf,
                        feature_ratio=config.feature_subsample_ratio,
                        bootstrap=config.bootstrap, seed=config.seed, workers=workers)
    return TrainedModel("rf", matrix.dimension, forest, config)


def train_gradient_boosting(matrix: FeatureMatrix, config: TrainConfig | None = None,
                            ) -> TrainedModel:
    config = config or DEFAULT_CONFIGS["gb"]
    y = _check(matrix)
    if config.learning_rate > 1:
        raise TrainingError("boosting learning_rate must lie in (0, 1]")
    try:
        ens, history = fit_boosting(matrix.X, y, n_rounds=config.n_trees,
                                    learning_rate=config.learning_rate,
                                    max_depth=config.max_depth,
                                    min_samples_leaf=config.min_samples_leaf)
    except FloatingPointError as exc:
        raise TrainingError(str(exc)) from exc
    return TrainedModel("gb", matrix.dimension, ens, config, info={"loss_history": history})


TRAINERS = {
    "lr": train_logistic,
    "svm": train_linear_svm,
    "dt": train_decision_tree,
    "rf": train_random_forest,
    "gb": train_gradient_boosting,
}


def train(name: str, matrix: FeatureMatrix, config: TrainConfig | None = None,
          workers: int = 1) -> TrainedModel:
    if name not in TRAINERS:
        raise KeyError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    if name == "rf":
        return train_random_forest(matrix, config, workers=workers)
    return TRAINERS[name](matrix, config)
