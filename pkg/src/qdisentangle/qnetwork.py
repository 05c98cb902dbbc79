"""Fully connected Q-network with hand-written backprop and Adam."""
from __future__ import annotations

import numpy as np


class QNetwork:
    """ReLU MLP with a linear output layer.

    ``weights[i]`` has shape ``(fan_in, fan_out)``; initialization is uniform
    in ``+-sqrt(6 / fan_in)`` with zero biases.
    """

    def __init__(self, n_in: int, n_out: int, hidden=(512,) * 6, rng=None, dtype=np.float32):
        self.sizes = (int(n_in),) + tuple(int(h) for h in hidden) + (int(n_out),)
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(0) if rng is None else rng
        self.weights, self.biases = [], []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            lim = np.sqrt(6.0 / fan_in)
            self.weights.append(rng.uniform(-lim, lim, (fan_in, fan_out)).astype(self.dtype))
            self.biases.append(np.zeros(fan_out, dtype=self.dtype))

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]

    def params(self) -> list:
        return self.weights + self.biases

    def copy(self) -> "QNetwork":
        new = object.__new__(QNetwork)
        new.sizes, new.dtype = self.sizes, self.dtype
        new.weights = [w.copy() for w in self.weights]
        new.biases = [b.copy() for b in self.biases]
        return new

    def load_from(self, other: "QNetwork"):
        for dst, src in zip(self.params(), other.params()):
            dst[...] = src

    def zero_(self) -> "QNetwork":
        for p in self.params():
            p[...] = 0
        return self

    def forward(self, x, keep: bool = False):
        x = np.asarray(x, dtype=self.dtype)
        if x.shape[-1] != self.n_in:
            raise ValueError(f"expected input dimension {self.n_in}, got {x.shape[-1]}")
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0)
            acts.append(h)
        return (h, acts) if keep else h

    def backward(self, acts, grad_out):
        """Gradients of a scalar whose derivative w.r.t. the output is ``grad_out``."""
        gw = [None] * len(self.weights)
        gb = [None] * len(self.biases)
        g = grad_out
        for i in range(len(self.weights) - 1, -1, -1):
            if i < len(self.weights) - 1:
                g = g * (acts[i + 1] > 0)
            gw[i] = acts[i].T @ g
            gb[i] = g.sum(axis=0)
            if i:
                g = g @ self.weights[i].T
        return gw + gb


def q_forward(net: QNetwork, s) -> np.ndarray:
    """Q-values of every action for state encoding(s) ``s``."""
    return net.forward(s)


class Adam:
    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.beta1**self.t
        c2 = 1 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= (self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)).astype(p.dtype)


def td_loss_and_grad(net, target_net, s, a, r, s2, done, weights, gamma, value_clip=None):
    """Importance-weighted squared TD error and its gradient w.r.t. ``net``.

    Target is ``r + gamma * max_a' Q_target(s2, a')``, reduced to ``r`` on
    terminal transitions. ``value_clip=(lo, hi)`` bounds the bootstrap term,
    which stops overestimates from feeding back into the targets.
    """
    a = np.asarray(a, dtype=int)
    r = np.asarray(r, dtype=float)
    done = np.asarray(done, dtype=bool)
    w = np.ones(len(a)) if weights is None else np.asarray(weights, dtype=float)
    boot = np.zeros(len(a))
    live = ~done
    if gamma and live.any():
        boot[live] = target_net.forward(np.asarray(s2)[live]).max(axis=1)
        if value_clip is not None:
            boot = np.clip(boot, *value_clip)
    y = r + gamma * boot
    q, acts = net.forward(s, keep=True)
    rows = np.arange(len(a))
    td = y - q[rows, a].astype(float)
    loss = float(np.mean(w * td**2))
    g_out = np.zeros_like(q)
    g_out[rows, a] = (-2.0 * w * td / len(a)).astype(q.dtype)
    return loss, td, net.backward(acts, g_out)


def train_step(net, target_net, batch, optimizer: Adam, gamma: float, value_clip=None):
    """One gradient step on the online network; ``target_net`` is left untouched.

    ``batch`` is ``(s, a, r, s2, done, weights)``. Returns ``(loss, td_errors)``.
    """
    s, a, r, s2, done, weights = batch
    if len(a) == 0:
        raise ValueError("empty batch")
    loss, td, grads = td_loss_and_grad(net, target_net, s, a, r, s2, done, weights, gamma, value_clip)
    if not np.isfinite(loss):
        raise FloatingPointError(f"non-finite loss {loss!r} (max |td| = {np.max(np.abs(td))})")
    optimizer.step(net.params(), grads)
    return loss, td
