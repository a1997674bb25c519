"""Vocabulary construction and index encoding for the classifier."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

PAD_INDEX = 0
UNK_INDEX = 1


@dataclass(frozen=True, slots=True)
class Vocabulary:
    """token → index mapping with reserved indices 0=PAD and 1=UNK."""

    token_to_index: dict[str, int]
    min_frequency: int = 1

    def __post_init__(self) -> None:
        indices = sorted(self.token_to_index.values())
        if indices != list(range(2, 2 + len(indices))):
            raise ValueError("vocabulary indices must be contiguous starting at 2")

    @property
    def size(self) -> int:
        return len(self.token_to_index) + 2

    def index(self, token: str) -> int:
        return self.token_to_index.get(token, UNK_INDEX)

    def tokens(self) -> tuple[str, ...]:
        """Tokens in index order (excluding PAD and UNK)."""
        return tuple(sorted(self.token_to_index, key=self.token_to_index.__getitem__))

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], min_frequency: int = 1) -> "Vocabulary":
        return cls({token: i + 2 for i, token in enumerate(tokens)}, min_frequency)


def build_vocab(token_lists: Iterable[Sequence[str]], min_frequency: int = 1) -> Vocabulary:
    """Deterministic vocabulary: tokens sorted by frequency, ties lexicographic.

    Build from the training split only; test-fold tokens must fall back to UNK.
    """
    if min_frequency < 1:
        raise ValueError("min_frequency must be >= 1")
    counts = Counter()
    for tokens in token_lists:
        counts.update(tokens)
    kept = [t for t, c in counts.items() if c >= min_frequency]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary.from_tokens(kept, min_frequency)


def encode(tokens: Sequence[str], vocab: Vocabulary, max_len: int = 128) -> np.ndarray:
    """Fixed-length index sequence: unknown → UNK, right-padded, truncated."""
    if max_len < 5:
        raise ValueError("max_len must be >= 5 to cover the largest convolution window")
    out = np.zeros(max_len, dtype=np.int64)
    for i, token in enumerate(tokens[:max_len]):
        out[i] = vocab.token_to_index.get(token, UNK_INDEX)
    return out


def encode_batch(
    token_lists: Sequence[Sequence[str]], vocab: Vocabulary, max_len: int = 128
) -> np.ndarray:
    out = np.zeros((len(token_lists), max_len), dtype=np.int64)
    for row, tokens in enumerate(token_lists):
        out[row] = encode(tokens, vocab, max_len)
    return out
