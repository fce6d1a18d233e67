"""Feed-forward network: two 136-unit ReLU layers and a softmax output, trained with Adam."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import LabeledSet, TrainedModel, make_model

HIDDEN = 136
FFNN_EPOCHS = 5
BATCH_SIZE = 32
LEARNING_RATE = 1e-3
BETA1, BETA2, ADAM_EPS = 0.9, 0.999, 1e-8


def he_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(rng, sizes):
    params = []
    for a, b in zip(sizes[:-1], sizes[1:]):
        params += [he_uniform(rng, a, b), np.zeros(b)]
    return params


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(params, X):
    """Logits and the per-layer activations needed for backprop."""
    acts = [X]
    h = X
    n_layers = len(params) // 2
    for layer in range(n_layers):
        W, b = params[2 * layer], params[2 * layer + 1]
        z = h @ W + b
        h = np.maximum(z, 0.0) if layer < n_layers - 1 else z
        acts.append(h)
    return h, acts


def loss_and_grads(params, X, y):
    """Mean sparse categorical cross-entropy and its gradient for every parameter."""
    logits, acts = forward(params, X)
    n = X.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -logp[np.arange(n), y].mean()
    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads = [None] * len(params)
    for layer in reversed(range(len(params) // 2)):
        W = params[2 * layer]
        grads[2 * layer] = acts[layer].T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer:
            delta = (delta @ W.T) * (acts[layer] > 0)
    return float(loss), grads


class Adam:
    def __init__(self, params, lr=LEARNING_RATE, beta1=BETA1, beta2=BETA2, eps=ADAM_EPS):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class FFNNCore:
    params: list

    def scores(self, Z):
        return forward(self.params, Z)[0]

    def proba(self, Z):
        return softmax(self.scores(Z))

    def predict(self, Z):
        return np.argmax(self.scores(Z), axis=1)

    def to_dict(self):
        return {"params": [p.tolist() for p in self.params]}

    @classmethod
    def from_dict(cls, d):
        return cls([np.asarray(p, dtype=float) for p in d["params"]])


def fit_ffnn(Z, y, n_classes, epochs=FFNN_EPOCHS, seed=0, batch_size=BATCH_SIZE,
             lr=LEARNING_RATE, hidden=HIDDEN, history=None):
    rng = np.random.default_rng(seed)
    params = init_params(rng, [Z.shape[1], hidden, hidden, n_classes])
    opt = Adam(params, lr)
    y = np.asarray(y)
    n = Z.shape[0]
    for _ in range(epochs):
        perm = rng.permutation(n)
        for a in range(0, n, batch_size):
            idx = perm[a:a + batch_size]
            loss, grads = loss_and_grads(params, Z[idx], y[idx])
            opt.step(params, grads)
        if history is not None:
            history.append(loss_and_grads(params, Z, y)[0])
    return FFNNCore(params)


def train_ffnn(data: LabeledSet, epochs: int = FFNN_EPOCHS, seed: int = 0,
               batch_size: int = BATCH_SIZE, lr: float = LEARNING_RATE, hidden: int = HIDDEN) -> TrainedModel:
    if epochs < 1:
        raise ValueError("epochs must be at least 1")
    return make_model(
        "ffnn", data,
        lambda Z: fit_ffnn(Z, data.labels, data.class_count, epochs, seed, batch_size, lr, hidden),
        {"epochs": int(epochs), "batch_size": batch_size, "lr": lr, "hidden": hidden}, seed)
