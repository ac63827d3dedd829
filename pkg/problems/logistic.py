"""
Multinomial logistic regression objective.
"""

import logging
from typing import Tuple

import numpy as np

from problems.classification import ClassificationObjective, softmax_cross_entropy

logger = logging.getLogger(__name__)


class LogisticProblem(ClassificationObjective):
    """
    Ridge-regularized multinomial logistic loss on one worker's samples.

    Parameters are a (C, p + 1) weight matrix with the bias in the last
    column, flattened row-major.

    The smoothness constant is the documented bound
    L = max_j ||[a_j; 1]||^2 / 2 + ridge: the softmax Hessian with respect
    to the logits has spectral norm at most 1/2.
    """

    def __init__(self, features, labels, n_classes, batch_size=64, ridge=1e-3, noise_bound=0.0):
        super().__init__(features, labels, n_classes, batch_size, ridge, noise_bound)
        self.n_features = self.features.shape[1]
        self.dimension = self.n_classes * (self.n_features + 1)
        augmented_sq = (self.features ** 2).sum(axis=1) + 1.0
        self.smoothness = float(0.5 * augmented_sq.max() + self.ridge)

    def _unpack(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        weights = x.reshape(self.n_classes, self.n_features + 1)
        return weights[:, :-1], weights[:, -1]

    def logits(self, x: np.ndarray, features: np.ndarray) -> np.ndarray:
        W, bias = self._unpack(x)
        return features @ W.T + bias

    def _loss_and_gradient(self, x, features, targets):
        loss, grad_logits = softmax_cross_entropy(self.logits(x, features), targets)
        grad_W = grad_logits.T @ features
        grad_bias = grad_logits.sum(axis=0)
        grad = np.concatenate([grad_W, grad_bias[:, None]], axis=1).reshape(-1)
        return loss, grad

    def initial_point(self) -> np.ndarray:
        """Zero weights (the loss is log C there)."""
        return np.zeros(self.dimension, dtype=np.float64)
