"""Logistic regression and linear SVM trained by mini-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit, log_expit


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    kind: str  # "logistic" or "hinge"

    def margin(self, X) -> np.ndarray:
        return np.asarray(X @ self.weights).ravel() + self.bias

    def predict(self, X) -> np.ndarray:
        # both kinds squash the margin through the logistic function
        return expit(self.margin(X))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(np.asarray(d["weights"], dtype=np.float64), float(d["bias"]), d["kind"])


def logistic_loss_grad(w: np.ndarray, b: float, X, y: np.ndarray, l2: float):
    """Mean negative log-likelihood plus ``l2/2 * ||w||^2``, and its gradient.

    ``y`` holds 0/1 targets. Returns ``(loss, grad_w, grad_b)``.
    """
    m = np.asarray(X @ w).ravel() + b
    # -log sigmoid(m) for y=1, -log sigmoid(-m) for y=0
    loss = -np.mean(np.where(y > 0, log_expit(m), log_expit(-m))) + 0.5 * l2 * np.dot(w, w)
    resid = (expit(m) - y) / len(y)
    grad_w = np.asarray(X.T @ resid).ravel() + l2 * w
    return float(loss), grad_w, float(resid.sum())


def hinge_loss_grad(w: np.ndarray, b: float, X, y: np.ndarray, l2: float):
    """Mean hinge loss plus ``l2/2 * ||w||^2`` and a sub-gradient.

    ``y`` holds 0/1 targets, mapped to -1/+1 here. Samples with margin
    ``y * m >= 1`` contribute nothing to the sub-gradient.
    """
    s = 2.0 * y - 1.0
    m = np.asarray(X @ w).ravel() + b
    slack = 1.0 - s * m
    loss = np.mean(np.maximum(0.0, slack)) + 0.5 * l2 * np.dot(w, w)
    coef = np.where(slack > 0, -s, 0.0) / len(y)
    grad_w = np.asarray(X.T @ coef).ravel() + l2 * w
    return float(loss), grad_w, float(coef.sum())


LOSSES = {"logistic": logistic_loss_grad, "hinge": hinge_loss_grad}


class DivergenceError(ArithmeticError):
    pass


def fit_linear(X, y: np.ndarray, kind: str, *, learning_rate: float, epochs: int,
               l2_penalty: float, batch_size: int, seed: int) -> tuple[LinearModel, list[float]]:
    """Mini-batch descent from zero weights; returns the model and per-epoch full loss.

    The batch order of epoch ``e`` comes from ``default_rng([seed, e])``.
    """
    loss_grad = LOSSES[kind]
    X = sp.csr_matrix(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, dim = X.shape
    w = np.zeros(dim)
    b = 0.0
    history = [loss_grad(w, b, X, y, l2_penalty)[0]]
    for epoch in range(epochs):
        order = np.random.default_rng([seed, epoch]).permutation(n)
        # overflow shows up as a non-finite loss below
        with np.errstate(over="ignore", invalid="ignore"):
            for lo in range(0, n, batch_size):
                idx = order[lo:lo + batch_size]
                _, gw, gb = loss_grad(w, b, X[idx], y[idx], l2_penalty)
                w -= learning_rate * gw
                b -= learning_rate * gb
            loss = loss_grad(w, b, X, y, l2_penalty)[0]
        if not np.isfinite(loss) or not np.all(np.isfinite(w)):
            raise DivergenceError(f"{kind} loss became non-finite at epoch {epoch}")
        history.append(loss)
    return LinearModel(w, float(b), kind), history
