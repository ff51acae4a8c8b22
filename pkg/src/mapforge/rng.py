"""Counter-based random streams.

Every sampler in the package draws from a stream keyed by
(seed, purpose, replica).  Streams with distinct keys are independent
Philox counter sequences, so replicas can run in any order, on any
number of threads, and still produce identical output.
"""
from __future__ import annotations

import hashlib

import numpy as np


def stream(seed: int, purpose: str, replica: int = 0) -> np.random.Generator:
    """Independent generator for the given (seed, purpose, replica) key."""
    h = hashlib.sha256(f"{seed}|{purpose}|{replica}".encode()).digest()
    key = int.from_bytes(h[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def edge_weights(n_edges: int, seed: int, replica: int = 0) -> np.ndarray:
    """Distinct uniform labels, one per edge id.

    The label of edge e is the e-th draw of the (seed, "weights", replica)
    stream, hence a function of (seed, replica, e) only.
    """
    g = stream(seed, "weights", replica)
    while True:
        w = g.random(n_edges)
        if len(np.unique(w)) == n_edges:
            return w


class UniformBuffer:
    """Buffered uniform(0,1) draws for tight sampling loops."""

    __slots__ = ["_g", "_buf", "_i", "_n"]

    def __init__(self, g: np.random.Generator, block: int = 16384):
        self._g = g
        self._n = block
        self._buf = g.random(block).tolist()
        self._i = 0

    def next(self) -> float:
        i = self._i
        if i == self._n:
            self._buf = self._g.random(self._n).tolist()
            i = 0
        self._i = i + 1
        return self._buf[i]
