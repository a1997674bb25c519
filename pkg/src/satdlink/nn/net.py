"""Siamese text-CNN forward and backward passes in plain numpy.

Both towers share one embedding table and one set of filter banks. Gradients
are derived by hand through the full chain: fully-connected output, dropout,
concatenation, max-over-time pooling (subgradient routed to the argmax
position, ties to the lowest time index), ReLU, convolution, and embedding
lookup. Shared-weight gradients from the two towers are summed.

All math is float64. The PAD embedding row participates in the forward pass
as an ordinary (zero-initialized) embedding; `loss_and_gradients` returns the
true gradient including that row, and the training loop is responsible for
keeping the row frozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..model import CLASS_ORDER

DEFAULT_WINDOW_SIZES = (1, 2, 3, 4, 5)
DEFAULT_FILTERS = 200
DEFAULT_EMBED_DIM = 300
NUM_CLASSES = len(CLASS_ORDER)


@dataclass(slots=True)
class TowerParams:
    """Embedding table plus one filter bank per window size."""

    embedding: np.ndarray
    conv_w: dict[int, np.ndarray]
    conv_b: dict[int, np.ndarray]

    def __post_init__(self) -> None:
        if self.embedding.ndim != 2:
            raise ValueError("embedding must be 2-D (vocab x embed_dim)")
        dim = self.embedding.shape[1]
        for w, weights in self.conv_w.items():
            if weights.shape[1:] != (w, dim):
                raise ValueError(f"conv_w[{w}] must have shape (filters, {w}, {dim})")
            if self.conv_b[w].shape != (weights.shape[0],):
                raise ValueError(f"conv_b[{w}] must have shape (filters,)")

    @property
    def vocab_size(self) -> int:
        return self.embedding.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def window_sizes(self) -> tuple[int, ...]:
        return tuple(sorted(self.conv_w))

    @property
    def filters_per_window(self) -> int:
        return next(iter(self.conv_w.values())).shape[0]

    @property
    def feature_width(self) -> int:
        return sum(bank.shape[0] for bank in self.conv_w.values())


@dataclass(slots=True)
class PairClassifierParams:
    """Shared tower plus the pair-level output layer."""

    tower: TowerParams
    fc_w: np.ndarray
    fc_b: np.ndarray
    dropout_rate: float = 0.5

    def __post_init__(self) -> None:
        width = 2 * self.tower.feature_width
        if self.fc_w.shape != (width, NUM_CLASSES):
            raise ValueError(f"fc_w must have shape ({width}, {NUM_CLASSES})")
        if self.fc_b.shape != (NUM_CLASSES,):
            raise ValueError(f"fc_b must have shape ({NUM_CLASSES},)")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")

    @property
    def embedding(self) -> np.ndarray:
        return self.tower.embedding

    @property
    def pair_feature_width(self) -> int:
        return 2 * self.tower.feature_width

    def tensors(self) -> dict[str, np.ndarray]:
        """All parameter tensors in a fixed, documented order."""
        out: dict[str, np.ndarray] = {"embedding": self.tower.embedding}
        for w in self.tower.window_sizes:
            out[f"conv_w_{w}"] = self.tower.conv_w[w]
            out[f"conv_b_{w}"] = self.tower.conv_b[w]
        out["fc_w"] = self.fc_w
        out["fc_b"] = self.fc_b
        return out

    def copy(self) -> "PairClassifierParams":
        return PairClassifierParams(
            tower=TowerParams(
                embedding=self.tower.embedding.copy(),
                conv_w={w: a.copy() for w, a in self.tower.conv_w.items()},
                conv_b={w: a.copy() for w, a in self.tower.conv_b.items()},
            ),
            fc_w=self.fc_w.copy(),
            fc_b=self.fc_b.copy(),
            dropout_rate=self.dropout_rate,
        )


def init_tower_params(
    vocab_size: int,
    embed_dim: int = DEFAULT_EMBED_DIM,
    window_sizes: Sequence[int] = DEFAULT_WINDOW_SIZES,
    filters_per_window: int = DEFAULT_FILTERS,
    rng: np.random.Generator | None = None,
) -> TowerParams:
    """Embedding uniform in [-0.25, 0.25] with PAD row zero; filters uniform
    scaled by 1/sqrt(fan_in); biases zero."""
    if rng is None:
        rng = np.random.default_rng(0)
    embedding = rng.uniform(-0.25, 0.25, size=(vocab_size, embed_dim))
    embedding[0] = 0.0
    conv_w: dict[int, np.ndarray] = {}
    conv_b: dict[int, np.ndarray] = {}
    for w in window_sizes:
        bound = 1.0 / np.sqrt(w * embed_dim)
        conv_w[w] = rng.uniform(-bound, bound, size=(filters_per_window, w, embed_dim))
        conv_b[w] = np.zeros(filters_per_window)
    return TowerParams(embedding=embedding, conv_w=conv_w, conv_b=conv_b)


def init_pair_params(
    vocab_size: int,
    embed_dim: int = DEFAULT_EMBED_DIM,
    window_sizes: Sequence[int] = DEFAULT_WINDOW_SIZES,
    filters_per_window: int = DEFAULT_FILTERS,
    dropout_rate: float = 0.5,
    seed: int = 0,
) -> PairClassifierParams:
    rng = np.random.default_rng(seed)
    tower = init_tower_params(vocab_size, embed_dim, window_sizes, filters_per_window, rng)
    width = 2 * tower.feature_width
    bound = 1.0 / np.sqrt(width)
    fc_w = rng.uniform(-bound, bound, size=(width, NUM_CLASSES))
    fc_b = np.zeros(NUM_CLASSES)
    return PairClassifierParams(tower=tower, fc_w=fc_w, fc_b=fc_b, dropout_rate=dropout_rate)


@dataclass(slots=True)
class _TowerCache:
    indices: np.ndarray
    embedded: np.ndarray
    windows: dict[int, np.ndarray] = field(default_factory=dict)
    pre: dict[int, np.ndarray] = field(default_factory=dict)
    argmax: dict[int, np.ndarray] = field(default_factory=dict)


def _check_indices(indices: np.ndarray, tower: TowerParams) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.ndim == 1:
        indices = indices[None, :]
    if indices.min(initial=0) < 0 or indices.max(initial=0) >= tower.vocab_size:
        raise IndexError("token index out of range for the embedding table")
    if indices.shape[1] < max(tower.window_sizes):
        raise ValueError("sequence shorter than the largest convolution window")
    return indices


def tower_forward_batch(
    indices: np.ndarray, tower: TowerParams
) -> tuple[np.ndarray, _TowerCache]:
    """Features (batch x feature_width) for a batch of index sequences."""
    indices = _check_indices(indices, tower)
    batch, length = indices.shape
    embedded = tower.embedding[indices]
    cache = _TowerCache(indices=indices, embedded=embedded)
    blocks = []
    for w in tower.window_sizes:
        positions = length - w + 1
        windows = np.stack([embedded[:, j : j + positions, :] for j in range(w)], axis=2)
        windows = windows.reshape(batch, positions, w * tower.embed_dim)
        flat_w = tower.conv_w[w].reshape(tower.conv_w[w].shape[0], -1)
        pre = windows @ flat_w.T + tower.conv_b[w]
        act = np.maximum(pre, 0.0)
        cache.windows[w] = windows
        cache.pre[w] = pre
        cache.argmax[w] = act.argmax(axis=1)
        blocks.append(act.max(axis=1))
    return np.concatenate(blocks, axis=1), cache


def tower_forward(indices: np.ndarray, tower: TowerParams) -> np.ndarray:
    """Feature vector for a single sequence."""
    features, _ = tower_forward_batch(np.asarray(indices)[None, :], tower)
    return features[0]


def tower_backward_batch(
    dfeatures: np.ndarray, cache: _TowerCache, tower: TowerParams
) -> dict[str, np.ndarray]:
    """Tower parameter gradients, plus the embedding gradient."""
    batch, length = cache.indices.shape
    dembedded = np.zeros_like(cache.embedded)
    grads: dict[str, np.ndarray] = {}
    offset = 0
    for w in tower.window_sizes:
        filters = tower.conv_w[w].shape[0]
        dpool = dfeatures[:, offset : offset + filters]
        offset += filters
        pre = cache.pre[w]
        dact = np.zeros_like(pre)
        np.put_along_axis(dact, cache.argmax[w][:, None, :], dpool[:, None, :], axis=1)
        dpre = dact * (pre > 0.0)
        windows = cache.windows[w]
        flat_w = tower.conv_w[w].reshape(filters, -1)
        grads[f"conv_w_{w}"] = np.tensordot(dpre, windows, axes=([0, 1], [0, 1])).reshape(
            tower.conv_w[w].shape
        )
        grads[f"conv_b_{w}"] = dpre.sum(axis=(0, 1))
        dwindows = dpre @ flat_w
        positions = length - w + 1
        dim = tower.embed_dim
        for j in range(w):
            dembedded[:, j : j + positions, :] += dwindows[:, :, j * dim : (j + 1) * dim]
    dembedding = np.zeros_like(tower.embedding)
    np.add.at(dembedding, cache.indices.ravel(), dembedded.reshape(-1, tower.embed_dim))
    grads["embedding"] = dembedding
    return grads


def _dropout_mask(shape: tuple[int, ...], rate: float, seed: int) -> np.ndarray:
    """Inverted-scaling dropout mask: kept units are scaled by 1/(1-rate)."""
    if rate == 0.0:
        return np.ones(shape)
    rng = np.random.default_rng(seed)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


@dataclass(slots=True)
class _PairCache:
    tower_cache: _TowerCache
    batch: int
    paired: np.ndarray
    mask: np.ndarray
    dropped: np.ndarray


def pair_forward_batch(
    indices_a: np.ndarray,
    indices_b: np.ndarray,
    params: PairClassifierParams,
    training: bool = False,
    seed: int = 0,
) -> tuple[np.ndarray, _PairCache]:
    """Logits (batch x 3) ordered (none, duplication, repayment).

    The two sides are stacked into one tower pass; dropout applies to the
    concatenated pair feature only, and only when training.
    """
    indices_a = np.asarray(indices_a, dtype=np.int64)
    indices_b = np.asarray(indices_b, dtype=np.int64)
    if indices_a.ndim == 1:
        indices_a = indices_a[None, :]
        indices_b = indices_b[None, :]
    if indices_a.shape != indices_b.shape:
        raise ValueError("both sides of the pair batch must share one shape")
    batch = indices_a.shape[0]
    stacked = np.concatenate([indices_a, indices_b], axis=0)
    features, tower_cache = tower_forward_batch(stacked, params.tower)
    paired = np.concatenate([features[:batch], features[batch:]], axis=1)
    if training:
        mask = _dropout_mask(paired.shape, params.dropout_rate, seed)
    else:
        mask = np.ones_like(paired)
    dropped = paired * mask
    logits = dropped @ params.fc_w + params.fc_b
    return logits, _PairCache(
        tower_cache=tower_cache, batch=batch, paired=paired, mask=mask, dropped=dropped
    )


def pair_forward(
    indices_a: np.ndarray,
    indices_b: np.ndarray,
    params: PairClassifierParams,
    training: bool = False,
    seed: int = 0,
) -> np.ndarray:
    logits, _ = pair_forward_batch(indices_a, indices_b, params, training, seed)
    return logits[0] if np.asarray(indices_a).ndim == 1 else logits


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(len(labels)), labels]
    return float((log_norm - picked).mean())


def loss_and_gradients(
    indices_a: np.ndarray,
    indices_b: np.ndarray,
    labels: np.ndarray,
    params: PairClassifierParams,
    training: bool = True,
    seed: int = 0,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and gradients for every tensor.

    The returned embedding gradient includes the PAD row; callers that want
    PAD frozen zero that row before applying the update.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("empty batch")
    if labels.min() < 0 or labels.max() >= NUM_CLASSES:
        raise ValueError("labels must be in {0, 1, 2}")
    logits, cache = pair_forward_batch(indices_a, indices_b, params, training, seed)
    batch = cache.batch
    loss = cross_entropy(logits, labels)

    dlogits = softmax(logits)
    dlogits[np.arange(batch), labels] -= 1.0
    dlogits /= batch

    grads: dict[str, np.ndarray] = {
        "fc_w": cache.dropped.T @ dlogits,
        "fc_b": dlogits.sum(axis=0),
    }
    dpaired = (dlogits @ params.fc_w.T) * cache.mask
    width = params.tower.feature_width
    dfeatures = np.concatenate([dpaired[:, :width], dpaired[:, width:]], axis=0)
    grads.update(tower_backward_batch(dfeatures, cache.tower_cache, params.tower))
    return loss, grads


def batch_loss(
    indices_a: np.ndarray,
    indices_b: np.ndarray,
    labels: np.ndarray,
    params: PairClassifierParams,
) -> float:
    """Inference-mode mean cross-entropy (no dropout, no gradients)."""
    logits, _ = pair_forward_batch(indices_a, indices_b, params, training=False)
    return cross_entropy(logits, np.asarray(labels, dtype=np.int64))
