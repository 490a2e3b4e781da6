"""Pretrained word-vector tables and fixed-length embedded sequences."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_SEQ_LEN = 100


@dataclass(frozen=True)
class VectorTable:
    dim: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("vector dimension must be positive")

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.vectors

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word.lower())


@dataclass(frozen=True)
class EmbeddedSequence:
    matrix: np.ndarray  # (seq_len, dim)
    mask: np.ndarray  # (seq_len,) bool


def load_vectors(path: str | Path, expected_dim: int) -> VectorTable:
    """Load a GloVe/fastText style text file (``word v1 ... vd`` per line).

    A fastText header line (``<count> <dim>``) is skipped. Duplicate words keep
    their first vector.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip().split(" ")
            if not parts or parts == [""]:
                continue
            if (lineno == 1 and expected_dim != 1 and len(parts) == 2
                    and all(p.isdigit() for p in parts)):
                continue
            if len(parts) - 1 != expected_dim:
                raise ValueError(
                    f"{path}:{lineno}: expected {expected_dim} values, got {len(parts) - 1}"
                )
            word = parts[0].lower()
            if word in vectors:
                continue
            try:
                vectors[word] = np.array(parts[1:], dtype=float)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric vector entry") from None
    return VectorTable(expected_dim, vectors)


def embed_sequence(tokens: Sequence[str], table: VectorTable, max_len: int) -> EmbeddedSequence:
    """Keep the first ``max_len`` tokens; OOV rows are zero but unmasked."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    matrix = np.zeros((max_len, table.dim))
    mask = np.zeros(max_len, dtype=bool)
    for i, token in enumerate(tokens[:max_len]):
        vec = table.get(token)
        if vec is not None:
            matrix[i] = vec
        mask[i] = True
    return EmbeddedSequence(matrix, mask)


def embed_batch(
    token_lists: Sequence[Sequence[str]], table: VectorTable, max_len: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stack embedded sequences into ``(B, max_len, dim)`` values and ``(B, max_len)`` masks."""
    seqs = [embed_sequence(t, table, max_len) for t in token_lists]
    if not seqs:
        return np.zeros((0, max_len, table.dim)), np.zeros((0, max_len), dtype=bool)
    return np.stack([s.matrix for s in seqs]), np.stack([s.mask for s in seqs])
