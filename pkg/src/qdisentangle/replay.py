"""Proportional prioritized replay over circuit-building transitions.

States are stored as padded action-id arrays (``-1`` marks an empty slot)
rather than one-hot encodings, which keeps a full buffer small.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    s: np.ndarray
    a: int
    r: float
    s2: np.ndarray
    done: bool
    priority: float = 1.0


class ReplayBuffer:
    def __init__(self, capacity: int, horizon: int, alpha: float = 0.6, eps: float = 1e-3):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.horizon = int(horizon)
        self.alpha = float(alpha)
        self.eps = float(eps)
        self.s = np.full((capacity, horizon), -1, dtype=np.int16)
        self.s2 = np.full((capacity, horizon), -1, dtype=np.int16)
        self.a = np.zeros(capacity, dtype=np.int64)
        self.r = np.zeros(capacity)
        self.done = np.zeros(capacity, dtype=bool)
        self.priority = np.zeros(capacity)
        self.size = 0
        self.next = 0
        self.max_priority = 1.0

    def __len__(self):
        return self.size

    def add(self, s, a, r, s2, done, priority=None):
        i = self.next
        self.s[i] = s
        self.a[i] = a
        self.r[i] = r
        self.s2[i] = s2
        self.done[i] = done
        self.priority[i] = self.max_priority if priority is None else priority
        self.next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        return i

    def probabilities(self) -> np.ndarray:
        p = self.priority[: self.size] ** self.alpha
        return p / p.sum()

    def sample(self, k: int, beta: float, rng: np.random.Generator):
        """Draw ``k`` indices with probability proportional to priority**alpha.

        Returns ``(indices, weights)``; weights are ``(N P(i))**-beta``
        normalized by their maximum.
        """
        if self.size < k:
            raise ValueError(f"buffer holds {self.size} transitions, {k} requested")
        probs = self.probabilities()
        cdf = np.cumsum(probs)
        idx = np.searchsorted(cdf, rng.random(k) * cdf[-1], side="right")
        idx = np.minimum(idx, self.size - 1)
        w = (self.size * probs[idx]) ** (-beta)
        return idx, w / w.max()

    def update(self, indices, td_errors):
        pr = np.abs(np.asarray(td_errors, dtype=float)) + self.eps
        self.priority[indices] = pr
        self.max_priority = max(self.max_priority, float(pr.max()))

    def get(self, i: int) -> Transition:
        return Transition(self.s[i].copy(), int(self.a[i]), float(self.r[i]),
                          self.s2[i].copy(), bool(self.done[i]), float(self.priority[i]))


def per_sample(buffer: ReplayBuffer, k: int, beta: float, rng):
    idx, w = buffer.sample(k, beta, rng)
    batch = (buffer.s[idx], buffer.a[idx], buffer.r[idx], buffer.s2[idx], buffer.done[idx])
    return batch, w, idx


def per_update(buffer: ReplayBuffer, indices, td_errors):
    buffer.update(indices, td_errors)
