"""Pure-Python/numpy implementations of the hot kernels.

Every function here has a drop-in twin in ``_ckernels.pyx``; the two are
tested against each other.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np


def char_ngrams(text: str, n: int) -> Counter:
    if len(text) < n:
        # too short for a full n-gram: the whole string is its only gram
        return Counter([text]) if text else Counter()
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def ngram_cosine(a: str, b: str, n: int) -> float:
    ca, cb = char_ngrams(a, n), char_ngrams(b, n)
    if not ca or not cb:
        return 0.0
    if len(ca) > len(cb):
        ca, cb = cb, ca
    dot = sum(c * cb[g] for g, c in ca.items() if g in cb)
    if dot == 0:
        return 0.0
    na = sum(c * c for c in ca.values())
    nb = sum(c * c for c in cb.values())
    # one sqrt of an exact integer product: identical inputs give exactly 1.0
    return min(1.0, dot / math.sqrt(na * nb))


def average_ranks(values) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[0]
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        # positions i..j (0-based) share ranks i+1..j+1
        ranks[order[i:j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                    np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def sgd_batches(X, y, order, start_batch, stop_batch, batch_size, w, b, lr, wd):
    """Run plain SGD over batches ``[start_batch, stop_batch)`` of ``order``.

    ``w`` is updated in place. Returns the new bias and the pre-update MSE of
    every processed batch.
    """
    n = order.shape[0]
    losses = np.empty(stop_batch - start_batch, dtype=np.float64)
    for k, bi in enumerate(range(start_batch, stop_batch)):
        idx = order[bi * batch_size:min(n, (bi + 1) * batch_size)]
        xb, yb = X[idx], y[idx]
        p = _sigmoid(xb @ w + b)
        r = p - yb
        m = idx.shape[0]
        losses[k] = float(r @ r) / m
        gz = (2.0 / m) * r * p * (1.0 - p)
        gw = xb.T @ gz + wd * w
        gb = float(gz.sum())
        w -= lr * gw
        b -= lr * gb
    return b, losses
