"""SATD candidate detection: keyword matching plus a trainable scorer seam.

The default pipeline flags artifacts by whole-word keyword matching. A
single-tower neural scorer with a 2-class head can replace it when a labeled
SATD/non-SATD set is available; it reuses the classifier's tower and shares
its tokenizer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import Artifact, SatdFlag
from .nn.net import TowerParams, init_tower_params, softmax, tower_backward_batch, tower_forward_batch
from .nn.store import load_scorer_params, save_scorer_params
from .nn.train import Adam, TrainConfig
from .nn.vocab import Vocabulary, build_vocab, encode_batch
from .pairs import DEFAULT_TOKENIZER, TokenizerConfig, tokenize

DEFAULT_KEYWORDS = (
    "todo",
    "fixme",
    "hack",
    "xxx",
    "workaround",
    "work-around",
    "temporary",
    "kludge",
    "technical debt",
    "not the best",
    "should be removed",
    "quick and dirty",
)


@dataclass(frozen=True, slots=True)
class PatternSet:
    """Case-insensitive whole-word keyword and phrase patterns."""

    patterns: tuple[str, ...] = DEFAULT_KEYWORDS
    match_mode: str = "whole-word"

    def __post_init__(self) -> None:
        if not self.patterns:
            raise ValueError("pattern set must be non-empty")
        if self.match_mode != "whole-word":
            raise ValueError(f"unsupported match_mode {self.match_mode!r}")
        object.__setattr__(self, "patterns", tuple(p.lower() for p in self.patterns))

    def compiled(self) -> list[tuple[str, re.Pattern[str]]]:
        out = []
        for pattern in self.patterns:
            body = r"\s+".join(re.escape(part) for part in pattern.split())
            out.append((pattern, re.compile(rf"(?<!\w){body}(?!\w)")))
        return out


DEFAULT_PATTERN_SET = PatternSet()


def load_pattern_set(path: str | Path) -> PatternSet:
    """Patterns from a text file, one per line; blank lines and # comments ignored."""
    patterns = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            patterns.append(line)
    return PatternSet(patterns=tuple(patterns))


def detect_keyword(
    artifact: Artifact, patterns: PatternSet = DEFAULT_PATTERN_SET
) -> tuple[bool, list[str]]:
    """(is_satd, matched patterns); each distinct pattern listed once."""
    text = " ".join(artifact.text.lower().split())
    matches = [pattern for pattern, regex in patterns.compiled() if regex.search(text)]
    return bool(matches), matches


class ModelNotTrainedError(RuntimeError):
    pass


class SatdScorer:
    """Single-tower text scorer with a 2-class output head.

    Produces P(SATD) for one text; shares the tower architecture and the
    tokenizer with the pair classifier.
    """

    def __init__(
        self,
        tower: TowerParams | None = None,
        fc_w: np.ndarray | None = None,
        fc_b: np.ndarray | None = None,
        vocab: Vocabulary | None = None,
        tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
    ) -> None:
        self.tower = tower
        self.fc_w = fc_w
        self.fc_b = fc_b
        self.vocab = vocab
        self.tokenizer = tokenizer

    @property
    def is_trained(self) -> bool:
        return self.tower is not None and self.fc_w is not None and self.vocab is not None

    def train(
        self,
        texts: Sequence[str],
        labels: Sequence[int],
        config: TrainConfig = TrainConfig(embed_dim=50, filters_per_window=20),
    ) -> None:
        """Fit on texts labeled 1 (SATD) or 0 (not SATD)."""
        if len(texts) != len(labels):
            raise ValueError("texts and labels must have equal length")
        if len(texts) < 2:
            raise ValueError("scorer training needs at least 2 examples")
        y = np.asarray(labels, dtype=np.int64)
        if y.min() < 0 or y.max() > 1:
            raise ValueError("scorer labels must be 0 or 1")
        self.vocab = build_vocab(
            [tokenize(t, self.tokenizer) for t in texts], config.min_frequency
        )
        encoded = encode_batch(
            [tokenize(t, self.tokenizer) for t in texts],
            self.vocab,
            self.tokenizer.max_sequence_length,
        )
        rng = np.random.default_rng(config.seed)
        self.tower = init_tower_params(
            self.vocab.size, config.embed_dim, config.window_sizes,
            config.filters_per_window, rng,
        )
        width = self.tower.feature_width
        bound = 1.0 / np.sqrt(width)
        self.fc_w = rng.uniform(-bound, bound, size=(width, 2))
        self.fc_b = np.zeros(2)

        tensors: dict[str, np.ndarray] = {"embedding": self.tower.embedding}
        for w in self.tower.window_sizes:
            tensors[f"conv_w_{w}"] = self.tower.conv_w[w]
            tensors[f"conv_b_{w}"] = self.tower.conv_b[w]
        tensors["fc_w"] = self.fc_w
        tensors["fc_b"] = self.fc_b
        optimizer = Adam(tensors, config)

        n = len(texts)
        for epoch in range(config.max_epochs):
            order = rng.permutation(n)
            for start in range(0, n, config.batch_size):
                chunk = order[start : start + config.batch_size]
                features, cache = tower_forward_batch(encoded[chunk], self.tower)
                logits = features @ self.fc_w + self.fc_b
                probs = softmax(logits)
                dlogits = probs.copy()
                dlogits[np.arange(chunk.size), y[chunk]] -= 1.0
                dlogits /= chunk.size
                grads = {
                    "fc_w": features.T @ dlogits,
                    "fc_b": dlogits.sum(axis=0),
                }
                grads.update(tower_backward_batch(dlogits @ self.fc_w.T, cache, self.tower))
                grads["embedding"][0] = 0.0
                optimizer.step(tensors, grads)

    def score(self, text: str) -> float:
        """P(SATD) in [0, 1]; deterministic for fixed parameters."""
        if not self.is_trained:
            raise ModelNotTrainedError("model not trained")
        encoded = encode_batch(
            [tokenize(text, self.tokenizer)], self.vocab, self.tokenizer.max_sequence_length
        )
        features, _ = tower_forward_batch(encoded, self.tower)
        probs = softmax(features @ self.fc_w + self.fc_b)
        return float(probs[0, 1])

    def save(self, path: str | Path) -> None:
        if not self.is_trained:
            raise ModelNotTrainedError("model not trained")
        save_scorer_params(path, self.tower, self.fc_w, self.fc_b, self.vocab, self.tokenizer)

    @classmethod
    def load(cls, path: str | Path) -> "SatdScorer":
        tower, fc_w, fc_b, vocab, tokenizer = load_scorer_params(path)
        return cls(tower=tower, fc_w=fc_w, fc_b=fc_b, vocab=vocab, tokenizer=tokenizer)


def detect_model(artifact: Artifact, scorer: SatdScorer) -> float:
    """Probability that the artifact self-admits technical debt."""
    return scorer.score(artifact.text)


def detect_corpus(
    artifacts: Sequence[Artifact],
    patterns: PatternSet = DEFAULT_PATTERN_SET,
    scorer: SatdScorer | None = None,
    threshold: float = 0.5,
) -> list[SatdFlag]:
    """Flag SATD candidates, recording how each was flagged.

    Keyword detection by default; when a trained scorer is supplied, texts
    scoring at or above the threshold are flagged instead.
    """
    flags: list[SatdFlag] = []
    if scorer is None:
        for artifact in artifacts:
            is_satd, matches = detect_keyword(artifact, patterns)
            if is_satd:
                flags.append(
                    SatdFlag(
                        artifact_id=artifact.id,
                        method="keyword",
                        matched_patterns=tuple(matches),
                    )
                )
    else:
        for artifact in artifacts:
            score = scorer.score(artifact.text)
            if score >= threshold:
                flags.append(
                    SatdFlag(artifact_id=artifact.id, method="model", score=score)
                )
    return flags
