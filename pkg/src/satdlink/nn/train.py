"""Seeded Adam training with early stopping on an internal validation split."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..model import CLASS_INDEX, CLASS_ORDER, RelationLabel, SatdPair
from ..pairs import DEFAULT_TOKENIZER, TokenizerConfig, tokenize
from .net import (
    DEFAULT_EMBED_DIM,
    DEFAULT_FILTERS,
    DEFAULT_WINDOW_SIZES,
    PairClassifierParams,
    batch_loss,
    init_pair_params,
    loss_and_gradients,
    pair_forward_batch,
    softmax,
)
from .vocab import Vocabulary, build_vocab, encode_batch


@dataclass(frozen=True, slots=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 50
    patience: int = 5
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 1
    embed_dim: int = DEFAULT_EMBED_DIM
    window_sizes: tuple[int, ...] = DEFAULT_WINDOW_SIZES
    filters_per_window: int = DEFAULT_FILTERS
    dropout_rate: float = 0.5
    min_frequency: int = 1
    val_fraction: float = 0.1

    def __post_init__(self) -> None:
        positive = {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "patience": self.patience,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "embed_dim": self.embed_dim,
            "filters_per_window": self.filters_per_window,
            "min_frequency": self.min_frequency,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if not self.window_sizes or any(w < 1 for w in self.window_sizes):
            raise ValueError("window_sizes must be positive")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")


def load_train_config(path: str | Path) -> TrainConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if "window_sizes" in raw:
        raw["window_sizes"] = tuple(raw["window_sizes"])
    return TrainConfig(**raw)


@dataclass(slots=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float


@dataclass(slots=True)
class TrainHistory:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    missing_classes: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "epochs": [
                {"epoch": e.epoch, "train_loss": e.train_loss, "val_loss": e.val_loss}
                for e in self.epochs
            ],
            "best_epoch": self.best_epoch,
            "missing_classes": list(self.missing_classes),
        }


class Adam:
    def __init__(self, tensors: dict[str, np.ndarray], config: TrainConfig) -> None:
        self.m = {name: np.zeros_like(t) for name, t in tensors.items()}
        self.v = {name: np.zeros_like(t) for name, t in tensors.items()}
        self.t = 0
        self.config = config

    def step(self, tensors: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        cfg = self.config
        self.t += 1
        correction1 = 1.0 - cfg.beta1**self.t
        correction2 = 1.0 - cfg.beta2**self.t
        for name, tensor in tensors.items():
            grad = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * grad
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * grad * grad
            tensor -= cfg.learning_rate * (m / correction1) / (
                np.sqrt(v / correction2) + cfg.epsilon
            )


def _pair_dataset(
    dataset: Sequence[SatdPair], vocab: Vocabulary, tokenizer: TokenizerConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    max_len = tokenizer.max_sequence_length
    texts_a = [tokenize(p.origin.text, tokenizer) for p in dataset]
    texts_b = [tokenize(p.target.text, tokenizer) for p in dataset]
    labels = []
    for pair in dataset:
        if pair.label is None:
            raise ValueError(f"pair {pair.pair_id} is unlabeled")
        labels.append(CLASS_INDEX[pair.label])
    return (
        encode_batch(texts_a, vocab, max_len),
        encode_batch(texts_b, vocab, max_len),
        np.asarray(labels, dtype=np.int64),
    )


def _validation_split(
    labels: np.ndarray, fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded stratified split; classes with one member stay in training."""
    train_idx: list[int] = []
    val_idx: list[int] = []
    for cls in range(len(CLASS_ORDER)):
        members = np.flatnonzero(labels == cls)
        if members.size == 0:
            continue
        members = rng.permutation(members)
        n_val = int(round(fraction * members.size))
        if members.size >= 2:
            n_val = max(1, min(n_val, members.size - 1))
        else:
            n_val = 0
        val_idx.extend(members[:n_val].tolist())
        train_idx.extend(members[n_val:].tolist())
    return np.asarray(sorted(train_idx)), np.asarray(sorted(val_idx))


def vocab_for_dataset(
    dataset: Sequence[SatdPair],
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
    min_frequency: int = 1,
) -> Vocabulary:
    token_lists = []
    for pair in dataset:
        token_lists.append(tokenize(pair.origin.text, tokenizer))
        token_lists.append(tokenize(pair.target.text, tokenizer))
    return build_vocab(token_lists, min_frequency)


def train(
    dataset: Sequence[SatdPair],
    vocab: Vocabulary,
    config: TrainConfig = TrainConfig(),
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> tuple[PairClassifierParams, TrainHistory]:
    """Train the pair classifier; deterministic for a fixed seed.

    Returns the parameters from the epoch with the best validation loss. A
    tenth of the data (stratified, seeded) is held out internally for early
    stopping. The PAD embedding row stays frozen at zero.
    """
    if len(dataset) < 2:
        raise ValueError("training needs at least 2 labeled pairs")
    if len(dataset) < 10:
        warnings.warn(f"training on only {len(dataset)} pairs", stacklevel=2)

    enc_a, enc_b, labels = _pair_dataset(dataset, vocab, tokenizer)
    missing = tuple(
        CLASS_ORDER[c].value for c in range(len(CLASS_ORDER)) if not np.any(labels == c)
    )
    if missing:
        warnings.warn(f"classes absent from training data: {', '.join(missing)}", stacklevel=2)

    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = _validation_split(labels, config.val_fraction, rng)
    if val_idx.size == 0:
        val_idx = train_idx

    params = init_pair_params(
        vocab_size=vocab.size,
        embed_dim=config.embed_dim,
        window_sizes=config.window_sizes,
        filters_per_window=config.filters_per_window,
        dropout_rate=config.dropout_rate,
        seed=config.seed,
    )
    history = TrainHistory(missing_classes=missing)
    if config.max_epochs == 0:
        return params, history

    tensors = params.tensors()
    optimizer = Adam(tensors, config)
    best = params.copy()
    best_val = np.inf
    stale = 0

    for epoch in range(config.max_epochs):
        order = rng.permutation(train_idx)
        epoch_loss = 0.0
        for batch_no, start in enumerate(range(0, order.size, config.batch_size)):
            chunk = order[start : start + config.batch_size]
            dropout_seed = (config.seed * 1_000_003 + epoch * 10_007 + batch_no) % (2**31)
            loss, grads = loss_and_gradients(
                enc_a[chunk], enc_b[chunk], labels[chunk], params,
                training=True, seed=dropout_seed,
            )
            grads["embedding"][0] = 0.0
            optimizer.step(tensors, grads)
            epoch_loss += loss * chunk.size
        train_loss = epoch_loss / order.size
        val_loss = batch_loss(enc_a[val_idx], enc_b[val_idx], labels[val_idx], params)
        history.epochs.append(EpochRecord(epoch=epoch, train_loss=train_loss, val_loss=val_loss))

        if val_loss < best_val:
            best_val = val_loss
            best = params.copy()
            history.best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    return best, history


def predict_encoded(
    enc_a: np.ndarray, enc_b: np.ndarray, params: PairClassifierParams
) -> tuple[np.ndarray, np.ndarray]:
    """(predicted class indices, probabilities) for encoded batches."""
    logits, _ = pair_forward_batch(enc_a, enc_b, params, training=False)
    probs = softmax(logits)
    return probs.argmax(axis=1), probs


def predict_texts(
    texts: Sequence[tuple[str, str]],
    params: PairClassifierParams,
    vocab: Vocabulary,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> list[tuple[RelationLabel, tuple[float, float, float]]]:
    """Argmax of softmax; ties break toward the lower class index."""
    if not texts:
        return []
    max_len = tokenizer.max_sequence_length
    enc_a = encode_batch([tokenize(a, tokenizer) for a, _ in texts], vocab, max_len)
    enc_b = encode_batch([tokenize(b, tokenizer) for _, b in texts], vocab, max_len)
    classes, probs = predict_encoded(enc_a, enc_b, params)
    return [
        (CLASS_ORDER[cls], tuple(row.tolist()))
        for cls, row in zip(classes, probs)
    ]


def predict_pairs(
    pairs: Sequence[SatdPair],
    params: PairClassifierParams,
    vocab: Vocabulary,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> list[tuple[RelationLabel, tuple[float, float, float]]]:
    return predict_texts(
        [(p.origin.text, p.target.text) for p in pairs], params, vocab, tokenizer
    )
