"""Per-edge logistic regression baseline: each pair classified in isolation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class LRModel:
    """L2-regularized logistic model over standardized text features."""

    weights: np.ndarray
    bias: float
    feature_means: np.ndarray
    feature_stds: np.ndarray
    l2: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("weights", "feature_means", "feature_stds"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.weights.size


def _loss_and_grad(w, b, X, y, l2):
    margins = y * (X @ w + b)
    loss = float(np.logaddexp(0.0, -margins).sum() + l2 * (w @ w))
    # d/dm log(1+e^-m) = -sigmoid(-m)
    coef = -y / (1.0 + np.exp(np.clip(margins, -700.0, 700.0)))
    grad_w = X.T @ coef + 2.0 * l2 * w
    grad_b = float(coef.sum())
    return loss, grad_w, grad_b


def train_lr(X, y, l2: float = 1e-3, max_iters: int = 1000, tol: float = 1e-6,
             loss_log=None) -> LRModel:
    """Fit by gradient descent with Armijo backtracking line search.

    Stops when the gradient norm (weights and bias jointly) drops to `tol`
    or after `max_iters` accepted steps.  Deterministic: weights start at
    zero and the line search has no randomness.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.size or X.shape[0] == 0:
        raise ValueError("need a non-empty feature matrix with one label per row")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")

    mean = X.mean(axis=0)
    std = np.maximum(X.std(axis=0), 1e-8)
    Z = (X - mean) / std

    w = np.zeros(X.shape[1])
    b = 0.0
    loss, grad_w, grad_b = _loss_and_grad(w, b, Z, y, l2)
    if loss_log is not None:
        loss_log.append(loss)
    for _ in range(max_iters):
        grad_sq = float(grad_w @ grad_w + grad_b * grad_b)
        if np.sqrt(grad_sq) <= tol:
            break
        step = 1.0
        accepted = False
        for _ in range(60):
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            new_loss, new_gw, new_gb = _loss_and_grad(w_new, b_new, Z, y, l2)
            if new_loss <= loss - 1e-4 * step * grad_sq:
                w, b, loss, grad_w, grad_b = w_new, b_new, new_loss, new_gw, new_gb
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        if loss_log is not None:
            loss_log.append(loss)

    meta = {"kind": "lr", "l2": l2, "max_iters": max_iters, "tol": tol,
            "final_grad_norm": float(np.sqrt(grad_w @ grad_w + grad_b * grad_b))}
    return LRModel(w, float(b), mean, std, l2, meta)


def predict_lr(model: LRModel, features):
    """Label and cooperative-class probability for one feature vector.

    Probability is clamped into the open interval (0, 1); the label is +1
    exactly when the probability is at least one half.
    """
    x = np.asarray(features, dtype=np.float64).reshape(-1)
    if x.size != model.dim:
        raise ValueError(f"got {x.size} features, model expects {model.dim}")
    z = (x - model.feature_means) / model.feature_stds
    logit = float(np.clip(model.weights @ z + model.bias, -700.0, 700.0))
    p = float(np.clip(1.0 / (1.0 + np.exp(-logit)), 1e-12, 1.0 - 1e-12))
    return (1 if p >= 0.5 else -1), p


def predict_lr_batch(model: LRModel, X):
    """Vector of labels and probabilities for a feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    Z = (X - model.feature_means) / model.feature_stds
    logits = np.clip(Z @ model.weights + model.bias, -700.0, 700.0)
    p = np.clip(1.0 / (1.0 + np.exp(-logits)), 1e-12, 1.0 - 1e-12)
    return np.where(p >= 0.5, 1, -1).astype(np.int64), p
