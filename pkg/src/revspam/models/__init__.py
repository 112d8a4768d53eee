from revspam.models.base import (
    DEFAULT_CONFIGS,
    MODEL_NAMES,
    TrainConfig,
    TrainedModel,
    TrainingError,
    default_config,
    predict,
    train,
    train_decision_tree,
    train_gradient_boosting,
    train_linear_svm,
    train_logistic,
    train_random_forest,
)
from revspam.models.ensemble import Ensemble
from revspam.models.linear import LinearModel, hinge_loss_grad, logistic_loss_grad
from revspam.models.tree import Presorted, Tree, best_splits, fit_tree, grow_tree

__all__ = [
    "DEFAULT_CONFIGS", "MODEL_NAMES", "TrainConfig", "TrainedModel", "TrainingError",
    "default_config", "predict", "train", "train_decision_tree", "train_gradient_boosting",
    "train_linear_svm", "train_logistic", "train_random_forest", "Ensemble", "LinearModel",
    "hinge_loss_grad", "logistic_loss_grad", "Presorted", "Tree", "best_splits", "fit_tree",
    "grow_tree",
]
