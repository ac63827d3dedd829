"""
One-hidden-layer tanh network with softmax cross-entropy output.

Desk-scale stand-in for a convolutional classifier: non-convex, with the
gradient computed by hand-written backpropagation.
"""

import logging
from typing import Tuple

import numpy as np

from numerics.exceptions import ConfigurationError
from problems.classification import ClassificationObjective, softmax_cross_entropy

logger = logging.getLogger(__name__)


class MlpProblem(ClassificationObjective):
    """
    MLP objective on one worker's samples.

    Parameter layout (flattened, in order): W1 (h, p), b1 (h), W2 (C, h),
    b2 (C).

    A tanh network has no global gradient-Lipschitz constant, so
    ``smoothness`` must be supplied; ``estimate_smoothness`` gives an
    empirical value over a sampled region.

    Args:
        features, labels, n_classes, batch_size, ridge, noise_bound: As in
            ``ClassificationObjective``.
        hidden: Hidden width h.
        smoothness: L used by the constants calculator.
    """

    def __init__(self, features, labels, n_classes, hidden=16, batch_size=64,
                 ridge=1e-3, noise_bound=0.0, smoothness=1.0):
        super().__init__(features, labels, n_classes, batch_size, ridge, noise_bound)
        if hidden < 1:
            raise ConfigurationError(f"hidden width must be positive, got {hidden}")
        if smoothness <= 0:
            raise ConfigurationError(f"smoothness must be positive, got {smoothness}")
        self.hidden = int(hidden)
        self.n_features = self.features.shape[1]
        h, p, C = self.hidden, self.n_features, self.n_classes
        self._sizes = [h * p, h, C * h, C]
        self.dimension = sum(self._sizes)
        self.smoothness = float(smoothness)

    def _unpack(self, x: np.ndarray):
        h, p, C = self.hidden, self.n_features, self.n_classes
        bounds = np.cumsum([0] + self._sizes)
        W1 = x[bounds[0]:bounds[1]].reshape(h, p)
        b1 = x[bounds[1]:bounds[2]]
        W2 = x[bounds[2]:bounds[3]].reshape(C, h)
        b2 = x[bounds[3]:bounds[4]]
        return W1, b1, W2, b2

    def logits(self, x: np.ndarray, features: np.ndarray) -> np.ndarray:
        W1, b1, W2, b2 = self._unpack(x)
        return np.tanh(features @ W1.T + b1) @ W2.T + b2

    def _loss_and_gradient(self, x, features, targets) -> Tuple[float, np.ndarray]:
        W1, b1, W2, b2 = self._unpack(x)
        hidden = np.tanh(features @ W1.T + b1)
        loss, grad_logits = softmax_cross_entropy(hidden @ W2.T + b2, targets)

        grad_W2 = grad_logits.T @ hidden
        grad_b2 = grad_logits.sum(axis=0)
        grad_pre = (grad_logits @ W2) * (1.0 - hidden ** 2)
        grad_W1 = grad_pre.T @ features
        grad_b1 = grad_pre.sum(axis=0)

        grad = np.concatenate([grad_W1.reshape(-1), grad_b1, grad_W2.reshape(-1), grad_b2])
        return loss, grad

    def initial_point(self, gen: np.random.Generator) -> np.ndarray:
        """Glorot-uniform weights and zero biases."""
        h, p, C = self.hidden, self.n_features, self.n_classes
        limit1 = np.sqrt(6.0 / (p + h))
        limit2 = np.sqrt(6.0 / (h + C))
        return np.concatenate([
            gen.uniform(-limit1, limit1, size=h * p),
            np.zeros(h),
            gen.uniform(-limit2, limit2, size=C * h),
            np.zeros(C),
        ])
