"""Versioned binary persistence for classifier parameters.

Layout: 4-byte magic "SDLK", uint32 format version, uint32 header length,
UTF-8 JSON header (dimensions, tokenizer config, vocabulary, tensor
manifest), then the raw float64 little-endian tensors in manifest order.
The header JSON is serialized with sorted keys so identical parameters
produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from ..pairs import TokenizerConfig
from .net import PairClassifierParams, TowerParams
from .vocab import Vocabulary

MAGIC = b"SDLK"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _tokenizer_header(tokenizer: TokenizerConfig) -> dict:
    return {
        "lowercase": tokenizer.lowercase,
        "min_token_length": tokenizer.min_token_length,
        "max_sequence_length": tokenizer.max_sequence_length,
    }


def _tokenizer_from_header(raw: dict) -> TokenizerConfig:
    return TokenizerConfig(
        lowercase=raw["lowercase"],
        min_token_length=raw["min_token_length"],
        max_sequence_length=raw["max_sequence_length"],
    )


def _write_model(
    path: Path,
    kind: str,
    tensors: dict[str, np.ndarray],
    extra_header: dict,
    vocab: Vocabulary,
    tokenizer: TokenizerConfig,
) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "model_kind": kind,
        "tokenizer": _tokenizer_header(tokenizer),
        "vocab": {"min_frequency": vocab.min_frequency, "tokens": list(vocab.tokens())},
        "tensors": [{"name": name, "shape": list(t.shape)} for name, t in tensors.items()],
        **extra_header,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for tensor in tensors.values():
            fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def _read_exact(fh: BinaryIO, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise ModelFormatError(f"truncated model file while reading {what}")
    return data


def _read_model(path: Path) -> tuple[dict, dict[str, np.ndarray], Vocabulary, TokenizerConfig]:
    with Path(path).open("rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != MAGIC:
            raise ModelFormatError(f"not a model file (bad magic {magic!r})")
        version, header_len = struct.unpack("<II", _read_exact(fh, 8, "version"))
        if version != FORMAT_VERSION:
            raise ModelFormatError(
                f"unsupported model format version {version} (supported: {FORMAT_VERSION})"
            )
        header = json.loads(_read_exact(fh, header_len, "header").decode("utf-8"))
        tensors: dict[str, np.ndarray] = {}
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = _read_exact(fh, count * 8, f"tensor {entry['name']}")
            tensors[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        trailing = fh.read(1)
        if trailing:
            raise ModelFormatError("trailing bytes after declared tensors")
    vocab = Vocabulary.from_tokens(
        header["vocab"]["tokens"], header["vocab"]["min_frequency"]
    )
    tokenizer = _tokenizer_from_header(header["tokenizer"])
    return header, tensors, vocab, tokenizer


def _tower_from_tensors(
    tensors: dict[str, np.ndarray], window_sizes: list[int], what: str
) -> TowerParams:
    conv_w = {}
    conv_b = {}
    for w in window_sizes:
        try:
            conv_w[w] = tensors[f"conv_w_{w}"]
            conv_b[w] = tensors[f"conv_b_{w}"]
        except KeyError as exc:
            raise ModelFormatError(f"missing tensor {exc.args[0]} in {what}") from exc
    try:
        return TowerParams(embedding=tensors["embedding"], conv_w=conv_w, conv_b=conv_b)
    except ValueError as exc:
        raise ModelFormatError(f"dimension mismatch in {what}: {exc}") from exc


def save_params(
    path: str | Path,
    params: PairClassifierParams,
    vocab: Vocabulary,
    tokenizer: TokenizerConfig,
) -> None:
    extra = {
        "embed_dim": params.tower.embed_dim,
        "window_sizes": list(params.tower.window_sizes),
        "filters_per_window": params.tower.filters_per_window,
        "dropout_rate": params.dropout_rate,
    }
    _write_model(Path(path), "pair", params.tensors(), extra, vocab, tokenizer)


def load_params(path: str | Path) -> tuple[PairClassifierParams, Vocabulary, TokenizerConfig]:
    header, tensors, vocab, tokenizer = _read_model(Path(path))
    if header.get("model_kind") != "pair":
        raise ModelFormatError(f"expected a pair classifier, got {header.get('model_kind')!r}")
    tower = _tower_from_tensors(tensors, header["window_sizes"], "pair classifier")
    if tower.vocab_size != vocab.size:
        raise ModelFormatError(
            f"dimension mismatch in tensor embedding: {tower.vocab_size} rows for "
            f"vocabulary of size {vocab.size}"
        )
    try:
        params = PairClassifierParams(
            tower=tower,
            fc_w=tensors["fc_w"],
            fc_b=tensors["fc_b"],
            dropout_rate=header["dropout_rate"],
        )
    except KeyError as exc:
        raise ModelFormatError(f"missing tensor {exc.args[0]}") from exc
    except ValueError as exc:
        raise ModelFormatError(f"dimension mismatch in tensor fc_w: {exc}") from exc
    return params, vocab, tokenizer


def save_scorer_params(
    path: str | Path,
    tower: TowerParams,
    fc_w: np.ndarray,
    fc_b: np.ndarray,
    vocab: Vocabulary,
    tokenizer: TokenizerConfig,
) -> None:
    """Persist a single-tower SATD/non-SATD scorer (2-class head)."""
    tensors: dict[str, np.ndarray] = {"embedding": tower.embedding}
    for w in tower.window_sizes:
        tensors[f"conv_w_{w}"] = tower.conv_w[w]
        tensors[f"conv_b_{w}"] = tower.conv_b[w]
    tensors["fc_w"] = fc_w
    tensors["fc_b"] = fc_b
    extra = {
        "embed_dim": tower.embed_dim,
        "window_sizes": list(tower.window_sizes),
        "filters_per_window": tower.filters_per_window,
    }
    _write_model(Path(path), "tower", tensors, extra, vocab, tokenizer)


def load_scorer_params(
    path: str | Path,
) -> tuple[TowerParams, np.ndarray, np.ndarray, Vocabulary, TokenizerConfig]:
    header, tensors, vocab, tokenizer = _read_model(Path(path))
    if header.get("model_kind") != "tower":
        raise ModelFormatError(f"expected a tower scorer, got {header.get('model_kind')!r}")
    tower = _tower_from_tensors(tensors, header["window_sizes"], "tower scorer")
    fc_w = tensors.get("fc_w")
    fc_b = tensors.get("fc_b")
    if fc_w is None or fc_b is None:
        raise ModelFormatError("missing tensor fc_w or fc_b")
    if fc_w.shape != (tower.feature_width, 2) or fc_b.shape != (2,):
        raise ModelFormatError(
            f"dimension mismatch in tensor fc_w: expected ({tower.feature_width}, 2), "
            f"got {fc_w.shape}"
        )
    return tower, fc_w, fc_b, vocab, tokenizer
