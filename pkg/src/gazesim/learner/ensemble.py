"""Temporal ensembling of overlapping action-chunk predictions."""

from __future__ import annotations

from collections import deque

import numpy as np


def temporal_ensemble(entries, k: float = 0.05) -> np.ndarray:
    """Blend chunk entries targeting the current step.

    ``entries`` is a sequence of (age, value) pairs where age counts how
    many steps ago the chunk was predicted (0 = newest) and value is that
    chunk's action vector for the current step. Weights are proportional
    to exp(-k * age) and normalized to sum to one.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("temporal_ensemble needs at least one chunk entry")
    ages = np.array([float(a) for a, _ in entries])
    values = np.array([np.asarray(v, dtype=float) for _, v in entries])
    weights = np.exp(-k * ages)
    weights /= weights.sum()
    return np.tensordot(weights, values, axes=1)


class ChunkEnsembler:
    """Streaming helper: push one chunk per control step, read blended actions.

    Keeps the last ``chunk_len`` predictions; ``action()`` ensembles every
    stored chunk's entry for the current step.
    """

    def __init__(self, chunk_len: int, k: float = 0.05):
        if chunk_len < 1:
            raise ValueError("chunk_len must be >= 1")
        self.chunk_len = chunk_len
        self.k = k
        self._chunks: deque = deque(maxlen=chunk_len)

    def push(self, chunk: np.ndarray) -> None:
        """Record the newest prediction, shape (chunk_len, action_dim)."""
        chunk = np.asarray(chunk, dtype=float)
        if chunk.shape[0] != self.chunk_len:
            raise ValueError(
                f"chunk has {chunk.shape[0]} steps, expected {self.chunk_len}")
        self._chunks.appendleft(chunk)

    def action(self) -> np.ndarray:
        """Blended action for the step the newest chunk starts at."""
        entries = [(age, chunk[age]) for age, chunk in enumerate(self._chunks)]
        return temporal_ensemble(entries, self.k)
