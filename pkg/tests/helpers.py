"""Shared test oracles: finite-difference gradients and synthetic blobs."""

import numpy as np

from ldprepr.ldp import RngSeed
from ldprepr.model import MlpConfig, init_mlp, log_loss, train

PARAM_NAMES = ("w1", "b1", "w2", "b2")


def numeric_gradients(model, X, y, h=1e-5):
    """Central-difference gradients of the mean cross entropy."""
    grads = {}
    for name in PARAM_NAMES:
        param = getattr(model, name)
        grad = np.zeros_like(param)
        iterator = np.nditer(param, flags=["multi_index"])
        for _ in iterator:
            index = iterator.multi_index
            orig = param[index]
            param[index] = orig + h
            loss_plus = log_loss(model, X, y)
            param[index] = orig - h
            loss_minus = log_loss(model, X, y)
            param[index] = orig
            grad[index] = (loss_plus - loss_minus) / (2.0 * h)
        grads[name] = grad
    return grads


def analytic_gradients_via_step(config, X, y, seed=0, lr=1e-3):
    """Recover the backprop gradient from one full-batch SGD update.

    With zero momentum, zero decay, zero dropout, and a single update, the
    parameter delta is exactly -lr * gradient.
    """
    probe = MlpConfig(
        input_dim=config.input_dim,
        hidden_units=config.hidden_units,
        num_classes=config.num_classes,
        dropout_rate=0.0,
        learning_rate=lr,
        decay=0.0,
        momentum=0.0,
        batch_size=len(X),
        epochs=1,
    )
    model = init_mlp(probe, RngSeed(seed))
    before = {name: getattr(model, name).copy() for name in PARAM_NAMES}
    reference = init_mlp(probe, RngSeed(seed))
    train(model, X, y, seed=RngSeed(seed, 99))
    grads = {
        name: (before[name] - getattr(model, name)) / lr for name in PARAM_NAMES
    }
    return reference, grads


def relative_error(a, b):
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return np.linalg.norm(a - b) / scale


def make_blobs(n=200, dim=20, separation=4.0, seed=0):
    """Two Gaussian blobs with a configurable center distance."""
    gen = np.random.default_rng(seed)
    direction = gen.normal(size=dim)
    direction /= np.linalg.norm(direction)
    center = direction * separation / 2.0
    y = np.arange(n) % 2
    X = np.where(y[:, None] == 1, center, -center) + gen.normal(size=(n, dim))
    return X, y
