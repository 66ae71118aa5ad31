"""
Logistic regression over whitened feature vectors.

Training is full-batch gradient descent on the L2-regularized mean logistic
loss. A step that would raise the loss is retried with half the learning rate.
The floor for halving is the smaller of ``min_learning_rate`` and 1/L, where L
bounds the curvature of the objective, so strong regularization cannot stall
training. Training stops when the gradient norm drops below ``tol``, or when
the loss can only move at rounding level.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DimensionError, TrainingError
from .logging_setup import get_logger
from .textformat import LineReader, format_array

logger = get_logger("stacker")

CLASS_WEIGHT_NONE = "none"
CLASS_WEIGHT_BALANCED = "balanced"
LOGISTIC_HEADER = "logistic"


@dataclass(frozen=True)
class StackerConfig:
    learning_rate: float = 0.1
    max_iterations: int = 5000
    tol: float = 1e-8
    l2_lambda: float = 1e-4
    class_weight: str = CLASS_WEIGHT_NONE
    min_learning_rate: float = 1e-6

    def __post_init__(self):
        if self.learning_rate <= 0 or self.min_learning_rate <= 0:
            raise ConfigError("logistic learning rates must be positive")
        if self.max_iterations < 1:
            raise ConfigError("lr_max_iterations must be >= 1")
        if self.tol < 0 or self.l2_lambda < 0:
            raise ConfigError("lr_tol and lr_l2_lambda must be non-negative")
        if self.class_weight not in (CLASS_WEIGHT_NONE, CLASS_WEIGHT_BALANCED):
            raise ConfigError("lr_class_weight must be 'none' or 'balanced'")


@dataclass(frozen=True, eq=False)
class LogisticModel:
    weights: np.ndarray
    bias: float
    l2_lambda: float

    @property
    def dim(self) -> int:
        return self.weights.size


def _sample_weights(labels: np.ndarray, class_weight: str) -> np.ndarray:
    if class_weight == CLASS_WEIGHT_BALANCED:
        n = labels.size
        n_pos = labels.sum()
        return np.where(labels == 1, n / (2.0 * n_pos), n / (2.0 * (n - n_pos)))
    return np.ones_like(labels, dtype=float)


def _objective(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, sw: np.ndarray, lam: float
) -> Tuple[float, np.ndarray, float]:
    z = X @ w + b
    # log(1 + e^z) - y z, computed without overflow.
    losses = np.logaddexp(0.0, z) - y * z
    loss = float(np.mean(sw * losses) + 0.5 * lam * np.dot(w, w))
    residual = sw * (expit(z) - y) / y.size
    grad_w = X.T @ residual + lam * w
    grad_b = float(residual.sum())
    return loss, grad_w, grad_b


def _smoothness(X: np.ndarray, sw: np.ndarray, lam: float) -> float:
    """Upper bound on the curvature of the objective over (weights, bias)."""
    # Hessian <= max(sw)/4 * [X 1]^T [X 1] / n + lam I; Frobenius norm bounds the spectral one.
    frobenius = float(np.sum(X * X)) + X.shape[0]
    return 0.25 * float(sw.max()) * frobenius / X.shape[0] + lam


def train_logistic_with_history(
    rows: np.ndarray, labels: np.ndarray, config: Optional[StackerConfig] = None
) -> Tuple[LogisticModel, List[float]]:
    """Fit the model and return it with the loss after every accepted step."""
    config = config or StackerConfig()
    X = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DimensionError(f"{X.shape[0]} rows but {y.size} labels")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    if y.min() == y.max():
        raise TrainingError("logistic regression needs both classes in the labels")

    sw = _sample_weights(y, config.class_weight)
    w = np.zeros(X.shape[1])
    b = 0.0
    lr = config.learning_rate
    # Below 1/L a gradient step cannot raise the loss, so backtracking may always reach it.
    min_lr = min(config.min_learning_rate, 1.0 / _smoothness(X, sw, config.l2_lambda))
    loss, grad_w, grad_b = _objective(w, b, X, y, sw, config.l2_lambda)
    history = [loss]

    for iteration in range(1, config.max_iterations + 1):
        grad_norm = math.sqrt(float(np.dot(grad_w, grad_w)) + grad_b * grad_b)
        if grad_norm < config.tol:
            logger.info(f"Logistic regression converged after {iteration - 1} iterations")
            break

        stalled = False
        while True:
            w_next = w - lr * grad_w
            b_next = b - lr * grad_b
            next_loss, next_grad_w, next_grad_b = _objective(
                w_next, b_next, X, y, sw, config.l2_lambda
            )
            if math.isfinite(next_loss) and next_loss <= loss:
                break
            if lr <= min_lr:
                # An increase at rounding level means the optimum is reached.
                if math.isfinite(next_loss) and next_loss - loss <= 1e-12 * max(1.0, abs(loss)):
                    stalled = True
                    break
                logger.error(f"Logistic loss increased at iteration {iteration}")
                raise TrainingError(
                    f"logistic loss increased at iteration {iteration} with minimum learning rate"
                )
            lr = max(lr / 2.0, min_lr)

        if stalled:
            logger.info(f"Logistic regression reached rounding level after {iteration} iterations")
            break
        w, b = w_next, b_next
        loss, grad_w, grad_b = next_loss, next_grad_w, next_grad_b
        history.append(loss)
    else:
        logger.warning(f"⚠️ Logistic regression stopped at {config.max_iterations} iterations")

    logger.debug(f"Logistic regression final loss {loss:.6f}")
    return LogisticModel(w, float(b), config.l2_lambda), history


def train_logistic(
    rows: np.ndarray, labels: np.ndarray, config: Optional[StackerConfig] = None
) -> LogisticModel:
    """L2-regularized logistic regression; label 1 is the malicious class."""
    return train_logistic_with_history(rows, labels, config)[0]


def decision_function(m: LogisticModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != m.dim:
        raise DimensionError(f"expected vectors of length {m.dim}, got {x.shape[-1]}")
    return x @ m.weights + m.bias


def predict_proba(m: LogisticModel, x: np.ndarray):
    """P(malicious) for one vector (float) or each row of a matrix (array)."""
    p = expit(decision_function(m, x))
    return float(p) if np.ndim(p) == 0 else p


def logistic_to_lines(m: LogisticModel) -> List[str]:
    return (
        [LOGISTIC_HEADER, f"bias {m.bias:.17g}", f"l2_lambda {m.l2_lambda:.17g}"]
        + format_array("weights", m.weights)
        + ["end"]
    )


def logistic_from_lines(reader: LineReader) -> LogisticModel:
    reader.expect(LOGISTIC_HEADER)
    try:
        (bias,) = [float(v) for v in reader.keyword("bias")]
        (l2_lambda,) = [float(v) for v in reader.keyword("l2_lambda")]
    except ValueError:
        raise reader.error("bad logistic header") from None
    weights = reader.array("weights")
    reader.expect("end")
    return LogisticModel(weights, bias, l2_lambda)
