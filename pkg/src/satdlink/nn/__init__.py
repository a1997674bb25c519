"""Siamese text-CNN pair classifier with hand-derived gradients."""

from .net import (
    PairClassifierParams,
    TowerParams,
    batch_loss,
    cross_entropy,
    init_pair_params,
    init_tower_params,
    loss_and_gradients,
    pair_forward,
    pair_forward_batch,
    softmax,
    tower_forward,
    tower_forward_batch,
)
from .store import (
    ModelFormatError,
    load_params,
    load_scorer_params,
    save_params,
    save_scorer_params,
)
from .train import (
    Adam,
    EpochRecord,
    TrainConfig,
    TrainHistory,
    load_train_config,
    predict_encoded,
    predict_pairs,
    predict_texts,
    train,
    vocab_for_dataset,
)
from .vocab import PAD_INDEX, UNK_INDEX, Vocabulary, build_vocab, encode, encode_batch

__all__ = [
    "PAD_INDEX",
    "UNK_INDEX",
    "Adam",
    "EpochRecord",
    "ModelFormatError",
    "PairClassifierParams",
    "TowerParams",
    "TrainConfig",
    "TrainHistory",
    "Vocabulary",
    "batch_loss",
    "build_vocab",
    "cross_entropy",
    "encode",
    "encode_batch",
    "init_pair_params",
    "init_tower_params",
    "load_params",
    "load_scorer_params",
    "load_train_config",
    "loss_and_gradients",
    "pair_forward",
    "pair_forward_batch",
    "predict_encoded",
    "predict_pairs",
    "predict_texts",
    "save_params",
    "save_scorer_params",
    "softmax",
    "tower_forward",
    "tower_forward_batch",
    "train",
    "vocab_for_dataset",
]
