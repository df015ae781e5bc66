"""Single-hidden-layer perceptron trained with momentum SGD.

The server-side classifier: ReLU hidden layer, softmax output, cross
entropy loss.  Dropout with inverted scaling is applied to the input
representation (not the hidden layer) during training.  The learning
rate decays per update step as lr0 / (1 + decay * step).  Everything is
plain numpy and deterministic for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import DivergenceError, ParameterError, ShapeError
from .ldp import RngSeed

__all__ = [
    "MlpConfig",
    "MlpModel",
    "TrainHistory",
    "init_mlp",
    "forward",
    "train",
    "evaluate",
    "MlpClassifier",
]


@dataclass(frozen=True)
class MlpConfig:
    """Architecture and optimizer settings for the classifier."""

    input_dim: int
    hidden_units: int = 128
    num_classes: int = 2
    dropout_rate: float = 0.5
    learning_rate: float = 0.01
    decay: float = 1e-6
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 50

    def __post_init__(self):
        for name in ("input_dim", "hidden_units", "num_classes", "batch_size"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.epochs < 0:
            raise ParameterError(f"epochs must be >= 0, got {self.epochs}")
        for name in ("dropout_rate", "momentum"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ParameterError(f"{name} must be in [0, 1), got {getattr(self, name)}")
        if self.learning_rate <= 0:
            raise ParameterError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.decay < 0:
            raise ParameterError(f"decay must be >= 0, got {self.decay}")


@dataclass
class MlpModel:
    """Weights, biases, momentum buffers, and the update counter."""

    config: MlpConfig
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    v_w1: np.ndarray
    v_b1: np.ndarray
    v_w2: np.ndarray
    v_b2: np.ndarray
    step: int = 0


@dataclass
class TrainHistory:
    """Per-epoch mean training loss and accuracy."""

    loss: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)


def init_mlp(config: MlpConfig, seed: RngSeed) -> MlpModel:
    """Fresh model: fan-scaled uniform weights, zero biases and velocities."""
    gen = seed.generator()
    bound1 = np.sqrt(6.0 / (config.input_dim + config.hidden_units))
    bound2 = np.sqrt(6.0 / (config.hidden_units + config.num_classes))
    w1 = gen.uniform(-bound1, bound1, size=(config.input_dim, config.hidden_units))
    w2 = gen.uniform(-bound2, bound2, size=(config.hidden_units, config.num_classes))
    return MlpModel(
        config=config,
        w1=w1,
        b1=np.zeros(config.hidden_units),
        w2=w2,
        b2=np.zeros(config.num_classes),
        v_w1=np.zeros_like(w1),
        v_b1=np.zeros(config.hidden_units),
        v_w2=np.zeros_like(w2),
        v_b2=np.zeros(config.num_classes),
    )


def apply_input_dropout(X: np.ndarray, rate: float, gen: np.random.Generator) -> np.ndarray:
    """Zero each input entry with probability ``rate``, rescaling the rest.

    The 1/(1-rate) rescaling keeps the expected pre-activation equal to
    the no-dropout pre-activation.
    """
    if rate == 0.0:
        return X
    mask = gen.random(X.shape) >= rate
    return X * mask / (1.0 - rate)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    raise ParameterError(f"expected RngSeed or numpy Generator, got {type(rng).__name__}")


def _check_batch(model: MlpModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.w1.shape[0]:
        raise ShapeError(
            f"expected (n, {model.w1.shape[0]}) input, got {X.shape}"
        )
    return X


def forward(model: MlpModel, batch, train_mode: bool = False, rng=None) -> np.ndarray:
    """Class probabilities for a batch; rows sum to 1.

    With ``train_mode`` and a positive dropout rate, input dropout is
    sampled from ``rng`` (an :class:`RngSeed` or numpy Generator).
    """
    X = _check_batch(model, batch)
    if train_mode and model.config.dropout_rate > 0.0:
        if rng is None:
            raise ParameterError("train_mode with dropout needs an rng")
        X = apply_input_dropout(X, model.config.dropout_rate, _as_generator(rng))
    hidden = np.maximum(X @ model.w1 + model.b1, 0.0)
    logits = hidden @ model.w2 + model.b2
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def log_loss(model: MlpModel, X, y) -> float:
    """Mean cross entropy of the model on labeled data, dropout disabled."""
    X = _check_batch(model, X)
    y = np.asarray(y, dtype=np.int64)
    hidden = np.maximum(X @ model.w1 + model.b1, 0.0)
    logits = hidden @ model.w2 + model.b2
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(log_norm - shifted[np.arange(X.shape[0]), y]))


def _train_step(model: MlpModel, X: np.ndarray, y: np.ndarray,
                dropout_rate: float, gen: np.random.Generator):
    """One forward/backward pass; returns (loss, correct, gradients)."""
    n = X.shape[0]
    Xd = apply_input_dropout(X, dropout_rate, gen)
    z1 = Xd @ model.w1 + model.b1
    hidden = np.maximum(z1, 0.0)
    logits = hidden @ model.w2 + model.b2

    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    norm = exp.sum(axis=1, keepdims=True)
    log_p = shifted - np.log(norm)
    loss = float(-log_p[np.arange(n), y].mean())
    correct = int((logits.argmax(axis=1) == y).sum())

    d_logits = exp / norm
    d_logits[np.arange(n), y] -= 1.0
    d_logits /= n
    d_w2 = hidden.T @ d_logits
    d_b2 = d_logits.sum(axis=0)
    d_hidden = d_logits @ model.w2.T
    d_hidden[z1 <= 0.0] = 0.0
    d_w1 = Xd.T @ d_hidden
    d_b1 = d_hidden.sum(axis=0)
    return loss, correct, (d_w1, d_b1, d_w2, d_b2)


def train(model: MlpModel, X, y, config: MlpConfig | None = None,
          seed: RngSeed = RngSeed(0)) -> tuple[MlpModel, TrainHistory]:
    """Mini-batch SGD with classical momentum; updates the model in place.

    Velocity update: v <- momentum * v - lr_t * grad; theta <- theta + v,
    with lr_t = lr0 / (1 + decay * t) and t counting completed updates.
    Data is reshuffled every epoch from ``seed``, which also drives the
    dropout masks.  Raises :class:`DivergenceError` on a non-finite loss.
    """
    cfg = model.config if config is None else config
    X = _check_batch(model, X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ParameterError("training data must be non-empty")
    if y.shape != (X.shape[0],):
        raise ShapeError(f"labels shape {y.shape} does not match {X.shape[0]} rows")
    if y.min() < 0 or y.max() >= cfg.num_classes:
        raise ParameterError(
            f"labels must lie in [0, {cfg.num_classes}), got range "
            f"[{y.min()}, {y.max()}]"
        )

    gen = seed.generator()
    history = TrainHistory()
    n = X.shape[0]
    for _ in range(cfg.epochs):
        order = gen.permutation(n)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, correct, grads = _train_step(
                model, X[idx], y[idx], cfg.dropout_rate, gen
            )
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite training loss at update {model.step}"
                )
            lr = cfg.learning_rate / (1.0 + cfg.decay * model.step)
            for name, grad in zip(("w1", "b1", "w2", "b2"), grads):
                velocity = getattr(model, f"v_{name}")
                velocity *= cfg.momentum
                velocity -= lr * grad
                param = getattr(model, name)
                param += velocity
            model.step += 1
            epoch_loss += loss * len(idx)
            epoch_correct += correct
        history.loss.append(epoch_loss / n)
        history.accuracy.append(epoch_correct / n)

    for name in ("w1", "b1", "w2", "b2"):
        if not np.isfinite(getattr(model, name)).all():
            raise DivergenceError(f"non-finite parameters in {name} after training")
    return model, history


def evaluate(model: MlpModel, X, y) -> float:
    """Fraction of argmax predictions matching the labels, dropout off."""
    X = _check_batch(model, X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ParameterError("evaluation data must be non-empty")
    probs = forward(model, X, train_mode=False)
    return float((probs.argmax(axis=1) == y).mean())


class MlpClassifier(ClassifierMixin, BaseEstimator):
    """scikit-learn front end for the numpy MLP.

    ``fit`` maps arbitrary label values to contiguous indices, initializes
    from ``seed``, and runs :func:`train`; ``predict`` maps back.
    """

    def __init__(self, hidden_units: int = 128, dropout_rate: float = 0.5,
                 learning_rate: float = 0.01, decay: float = 1e-6,
                 momentum: float = 0.9, batch_size: int = 32,
                 epochs: int = 50, seed: int = 0):
        self.hidden_units = hidden_units
        self.dropout_rate = dropout_rate
        self.learning_rate = learning_rate
        self.decay = decay
        self.momentum = momentum
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        config = MlpConfig(
            input_dim=X.shape[1],
            hidden_units=self.hidden_units,
            num_classes=len(self.classes_),
            dropout_rate=self.dropout_rate,
            learning_rate=self.learning_rate,
            decay=self.decay,
            momentum=self.momentum,
            batch_size=self.batch_size,
            epochs=self.epochs,
        )
        base = RngSeed(self.seed)
        self.model_ = init_mlp(config, base.child(0))
        _, self.history_ = train(self.model_, X, y_idx, seed=base.child(1))
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return forward(self.model_, X, train_mode=False)

    def predict(self, X):
        return self.classes_[self.predict_proba(X).argmax(axis=1)]
