"""Tokenization, cosine similarity, candidate pair generation, and sampling.

One tokenizer serves both similarity scoring and the neural classifier so
there is no train/serve skew. Similarity uses plain term-frequency vectors;
pairs are binned into ten similarity intervals for stratified sampling.
"""

from __future__ import annotations

import hashlib
import random
import re
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass
from math import sqrt
from typing import Iterable, Sequence

from .linker import LinkGraph
from .model import Artifact, ContainerKind, SatdPair, pair_direction

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

NUM_BINS = 10


@dataclass(frozen=True, slots=True)
class TokenizerConfig:
    lowercase: bool = True
    min_token_length: int = 2
    max_sequence_length: int = 128

    def __post_init__(self) -> None:
        if self.max_sequence_length < 5:
            raise ValueError("max_sequence_length must cover the largest convolution window (5)")
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")


DEFAULT_TOKENIZER = TokenizerConfig()


def tokenize(text: str, config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[str]:
    """Split on non-alphanumeric boundaries, dropping short tokens."""
    if config.lowercase:
        text = text.lower()
    return [t for t in _TOKEN_RE.findall(text) if len(t) >= config.min_token_length]


def cosine_similarity(tokens_a: Sequence[str], tokens_b: Sequence[str]) -> float:
    """Cosine of term-frequency vectors; empty input on either side gives 0."""
    if not tokens_a or not tokens_b:
        return 0.0
    counts_a = Counter(tokens_a)
    counts_b = Counter(tokens_b)
    dot = sum(count * counts_b[token] for token, count in counts_a.items())
    norm_a = sqrt(sum(c * c for c in counts_a.values()))
    norm_b = sqrt(sum(c * c for c in counts_b.values()))
    return min(1.0, max(0.0, dot / (norm_a * norm_b)))


def bin_index(similarity: float) -> int:
    """Bin of a similarity in the ten intervals [0,.1), …, [.9,1]."""
    if not 0.0 <= similarity <= 1.0:
        raise ValueError(f"similarity out of range: {similarity}")
    return min(NUM_BINS - 1, int(similarity * NUM_BINS))


def bin_interval(index: int) -> tuple[float, float]:
    if not 0 <= index < NUM_BINS:
        raise ValueError(f"bin index out of range: {index}")
    return index / NUM_BINS, (index + 1) / NUM_BINS


def pair_id_for(origin_id: str, target_id: str) -> str:
    digest = hashlib.sha1(f"{origin_id}\x00{target_id}".encode("utf-8")).hexdigest()
    return digest[:16]


def generate_pairs(
    satd_artifacts: Sequence[Artifact],
    graph: LinkGraph,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> list[SatdPair]:
    """Candidate pairs: the Cartesian product of SATD artifacts across every
    linked container pair.

    An unordered artifact pair reachable through several links is emitted
    once, keeping the first link (in deterministic edge order) as evidence.

    Code comments count as members of their containing commit as well as of
    their code location, so a link between an issue and a commit pairs the
    issue's SATD sections with the comments added or deleted by that commit.
    """
    by_container: dict[tuple, list[Artifact]] = defaultdict(list)
    for artifact in satd_artifacts:
        by_container[artifact.container.key].append(artifact)
        if artifact.container.kind is ContainerKind.CODE_LOCATION:
            commit_hash = artifact.container.native_id.rsplit("@", 1)[1]
            by_container[(artifact.project, ContainerKind.COMMIT.value, commit_hash)].append(
                artifact
            )
    for bucket in by_container.values():
        bucket.sort(key=lambda a: a.id)

    token_cache = {a.id: tokenize(a.text, tokenizer) for a in satd_artifacts}
    pairs: list[SatdPair] = []
    seen: set[frozenset[str]] = set()
    for edge in graph.edges:
        for left in by_container.get(edge.src.key, ()):
            for right in by_container.get(edge.dst.key, ()):
                if left.id == right.id:
                    continue
                key = frozenset((left.id, right.id))
                if key in seen:
                    continue
                seen.add(key)
                origin, target = pair_direction(left, right)
                pairs.append(
                    SatdPair(
                        pair_id=pair_id_for(origin.id, target.id),
                        origin=origin,
                        target=target,
                        via_link=edge,
                        similarity=cosine_similarity(
                            token_cache[origin.id], token_cache[target.id]
                        ),
                    )
                )
    return pairs


def stratified_sample(pairs: Sequence[SatdPair], n: int, seed: int) -> list[SatdPair]:
    """Sample n pairs with a target quota of n/10 per similarity bin.

    Integer-division remainder goes to the lowest-index bins. Bins short of
    their quota contribute everything they have and the shortfall is
    redistributed round-robin, ascending by bin index, to bins that still
    have unused pairs. Output is ordered by bin; within a bin the order is
    the seeded draw order.
    """
    if n < 10:
        raise ValueError("n must be >= 10")
    total = len(pairs)
    if n > total:
        warnings.warn(f"requested {n} pairs but only {total} available; returning all", stacklevel=2)
        n = total

    bins: list[list[SatdPair]] = [[] for _ in range(NUM_BINS)]
    for pair in pairs:
        bins[bin_index(pair.similarity)].append(pair)
    for bucket in bins:
        bucket.sort(key=lambda p: p.pair_id)

    base, remainder = divmod(n, NUM_BINS)
    quotas = [base + (1 if i < remainder else 0) for i in range(NUM_BINS)]
    take = [min(quotas[i], len(bins[i])) for i in range(NUM_BINS)]
    shortfall = n - sum(take)
    while shortfall > 0:
        progressed = False
        for i in range(NUM_BINS):
            if shortfall == 0:
                break
            if take[i] < len(bins[i]):
                take[i] += 1
                shortfall -= 1
                progressed = True
        if not progressed:
            break

    rng = random.Random(seed)
    sample: list[SatdPair] = []
    for i in range(NUM_BINS):
        if take[i]:
            sample.extend(rng.sample(bins[i], take[i]))
    return sample


@dataclass(frozen=True, slots=True)
class SimilarityStats:
    mean: float
    std: float
    bin_counts: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "bin_counts": list(self.bin_counts),
        }


def similarity_stats(pairs: Iterable[SatdPair]) -> SimilarityStats:
    """Mean, population standard deviation, and per-bin histogram."""
    sims = [p.similarity for p in pairs]
    if not sims:
        raise ValueError("similarity_stats requires at least one pair")
    mean = sum(sims) / len(sims)
    variance = sum((s - mean) ** 2 for s in sims) / len(sims)
    counts = [0] * NUM_BINS
    for s in sims:
        counts[bin_index(s)] += 1
    return SimilarityStats(mean=mean, std=sqrt(variance), bin_counts=tuple(counts))
