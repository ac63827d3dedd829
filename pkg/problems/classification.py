"""
Shared machinery for classification losses trained on a worker's local
samples: minibatch sampling, softmax cross-entropy and accuracy.
"""

import copy
import logging
from abc import abstractmethod
from typing import Optional, Tuple

import numpy as np

from numerics.exceptions import ConfigurationError
from problems.objective import Objective

logger = logging.getLogger(__name__)


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Encode integer labels as a (m, C) float64 indicator matrix."""
    labels = np.asarray(labels, dtype=np.int64)
    encoded = np.zeros((labels.shape[0], n_classes), dtype=np.float64)
    encoded[np.arange(labels.shape[0]), labels] = 1.0
    return encoded


def softmax_cross_entropy(logits: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean softmax cross-entropy and its gradient with respect to the logits.

    Args:
        logits: (m, C) scores.
        targets: (m, C) one-hot labels.

    Returns:
        Tuple of (mean loss, (probabilities - targets) / m).
    """
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    m = logits.shape[0]
    loss = float(-(targets * log_probs).sum() / m)
    return loss, (np.exp(log_probs) - targets) / m


class ClassificationObjective(Objective):
    """
    Base class for cross-entropy objectives over local labeled samples.

    The stochastic sample xi is a set of minibatch indices drawn without
    replacement. When the minibatch covers the whole local dataset the
    exact oracle is used, so the stochastic gradient equals the full one.
    Cross-entropy is non-negative and the ridge term is too, so 0 is used as
    the lower bound f_i^inf.

    Args:
        features: (m, p) local feature matrix.
        labels: (m,) integer labels in [0, n_classes).
        n_classes: Number of classes C.
        batch_size: Minibatch size.
        ridge: L2 regularization weight.
        noise_bound: sigma^2 (usually measured, see ``estimate_noise_bound``).
    """

    def __init__(
        self,
        features: np.ndarray,
        labels: np.ndarray,
        n_classes: int,
        batch_size: int = 64,
        ridge: float = 1e-3,
        noise_bound: float = 0.0,
    ):
        features = np.array(features, dtype=np.float64)
        labels = np.array(labels, dtype=np.int64)
        if features.ndim != 2 or labels.shape != (features.shape[0],):
            raise ConfigurationError(
                f"Features {features.shape} and labels {labels.shape} do not match"
            )
        if features.shape[0] == 0:
            raise ConfigurationError("A worker objective needs at least one sample")
        if labels.min() < 0 or labels.max() >= n_classes:
            raise ConfigurationError(f"Labels must lie in [0, {n_classes})")
        if batch_size < 1:
            raise ConfigurationError(f"batch_size must be positive, got {batch_size}")
        if ridge < 0 or noise_bound < 0:
            raise ConfigurationError("ridge and noise_bound must be non-negative")

        self.features = features
        self.labels = labels
        self.targets = one_hot(labels, n_classes)
        self.n_classes = int(n_classes)
        self.batch_size = int(batch_size)
        self.ridge = float(ridge)
        self.noise_bound = float(noise_bound)
        self.lower_bound = 0.0
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    def with_noise_bound(self, noise_bound: float) -> "ClassificationObjective":
        """Copy of this objective with a different sigma^2."""
        if noise_bound < 0:
            raise ConfigurationError(f"noise_bound must be non-negative, got {noise_bound}")
        clone = copy.copy(self)
        clone.noise_bound = float(noise_bound)
        return clone

    def with_smoothness(self, smoothness: float) -> "ClassificationObjective":
        """Copy of this objective with a different smoothness constant."""
        if smoothness <= 0:
            raise ConfigurationError(f"smoothness must be positive, got {smoothness}")
        clone = copy.copy(self)
        clone.smoothness = float(smoothness)
        return clone

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @abstractmethod
    def _loss_and_gradient(
        self, x: np.ndarray, features: np.ndarray, targets: np.ndarray
    ) -> Tuple[float, np.ndarray]:
        """Data loss (without ridge) and its gradient on the given rows."""

    @abstractmethod
    def logits(self, x: np.ndarray, features: np.ndarray) -> np.ndarray:
        """Class scores for the given feature rows."""

    def _rows(self, indices: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        if indices is None:
            return self.features, self.targets
        return self.features[indices], self.targets[indices]

    def value(self, x: np.ndarray) -> float:
        x = self.check_point(x)
        loss, _ = self._loss_and_gradient(x, self.features, self.targets)
        return loss + 0.5 * self.ridge * float(x @ x)

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        return self.sample_gradient(x, None)

    def draw_sample(self, gen: np.random.Generator) -> Optional[np.ndarray]:
        if self.batch_size >= self.n_samples:
            return None
        return np.sort(gen.choice(self.n_samples, size=self.batch_size, replace=False))

    def sample_gradient(self, x: np.ndarray, sample: Optional[np.ndarray]) -> np.ndarray:
        x = self.check_point(x)
        features, targets = self._rows(sample)
        _, grad = self._loss_and_gradient(x, features, targets)
        return grad + self.ridge * x

    def accuracy(self, x: np.ndarray, features: Optional[np.ndarray] = None,
                 labels: Optional[np.ndarray] = None) -> float:
        """Top-1 accuracy on the given rows (local data by default)."""
        x = self.check_point(x)
        if features is None:
            features, labels = self.features, self.labels
        if len(labels) == 0:
            return float("nan")
        predictions = self.logits(x, np.asarray(features, dtype=np.float64)).argmax(axis=1)
        return float(np.mean(predictions == np.asarray(labels)))
