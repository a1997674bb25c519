"""Synthetic labeled pair generation with planted lexical signals.

Duplication pairs share a marker token on both sides; repayment pairs carry a
"fixed"-family token on the later (target) side; none pairs are plain filler.
The signals are drawn from small closed vocabularies so every cross-validation
training split sees them, making the dataset separable by construction.
"""

from __future__ import annotations

import hashlib
import random
from typing import Sequence

from .model import (
    Artifact,
    Container,
    ContainerKind,
    Link,
    ReferenceKind,
    RelationLabel,
    SatdPair,
    SourceKind,
)
from .pairs import DEFAULT_TOKENIZER, TokenizerConfig, cosine_similarity, pair_id_for, tokenize

FILLER_TOKENS = (
    "parser", "cache", "buffer", "config", "handler", "loader", "index", "thread",
    "retry", "cleanup", "legacy", "module", "branch", "merge", "timeout", "socket",
    "stream", "schema", "column", "query", "driver", "worker", "queue", "batch",
    "logger", "metric", "format", "header", "token", "session", "filter", "router",
    "widget", "layout", "canvas", "kernel", "daemon", "proxy", "bridge", "mirror",
)

DUPLICATION_MARKERS = (
    "markalpha", "markbravo", "markdelta", "markgamma", "markkappa", "marksigma",
)

REPAYMENT_MARKERS = (
    "fixed", "resolved", "repaid", "addressed", "closed", "finished",
)

# Class mix mirroring the labeled corpus the relation classifier targets:
# roughly 41% none, 20% duplication, 39% repayment.
DEFAULT_PROPORTIONS = {
    RelationLabel.NONE: 0.413,
    RelationLabel.DUPLICATION: 0.197,
    RelationLabel.REPAYMENT: 0.390,
}

_ALL_KINDS = tuple(SourceKind)


def _fake_commit_hash(tag: str) -> str:
    return hashlib.sha1(tag.encode("utf-8")).hexdigest()


def make_artifact(
    kind: SourceKind,
    text: str,
    created_at: int,
    uid: int,
    project: str = "synth",
) -> Artifact:
    """A schema-valid artifact of any source kind, for fixtures and tests."""
    if kind is SourceKind.COMMIT_MESSAGE:
        container = Container(ContainerKind.COMMIT, _fake_commit_hash(f"c{uid}"), project)
    elif kind in (SourceKind.COMMENT_ADDED, SourceKind.COMMENT_DELETED):
        container = Container(
            ContainerKind.CODE_LOCATION,
            f"src/mod{uid % 17}.java@{_fake_commit_hash(f'c{uid}')}",
            project,
        )
    elif kind.value.startswith("issue_"):
        container = Container(ContainerKind.ISSUE, str(1000 + uid), project)
    else:
        container = Container(ContainerKind.PULL, str(5000 + uid), project)
    return Artifact(
        id=f"{project}/{kind.value}/{uid}",
        project=project,
        source_kind=kind,
        text=text,
        author="dev",
        is_bot=False,
        created_at=created_at,
        container=container,
    )


def _link_between(origin: Artifact, target: Artifact) -> Link:
    if target.container.kind is ContainerKind.COMMIT:
        kind = ReferenceKind.COMMIT_HASH
        evidence = target.container.native_id[:7]
    elif target.container.kind is ContainerKind.PULL:
        kind = ReferenceKind.PULL_ID
        evidence = f"#{target.container.native_id}"
    elif target.container.kind is ContainerKind.ISSUE:
        kind = ReferenceKind.ISSUE_ID
        evidence = f"#{target.container.native_id}"
    else:
        kind = ReferenceKind.CONTAINING_COMMIT
        evidence = target.container.native_id
    return Link(
        src=origin.container,
        dst=target.container,
        reference_kind=kind,
        evidence_text=evidence,
        evidence_artifact_id=origin.id,
    )


def _class_counts(n: int, proportions: dict[RelationLabel, float]) -> dict[RelationLabel, int]:
    counts = {label: int(round(share * n)) for label, share in proportions.items()}
    drift = n - sum(counts.values())
    order = sorted(proportions, key=proportions.__getitem__, reverse=True)
    i = 0
    while drift != 0:
        counts[order[i % len(order)]] += 1 if drift > 0 else -1
        drift += -1 if drift > 0 else 1
        i += 1
    return counts


def generate_synthetic_pairs(
    n: int = 600,
    seed: int = 0,
    proportions: dict[RelationLabel, float] | None = None,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> list[SatdPair]:
    """n labeled pairs with planted signals, deterministic per seed."""
    if proportions is None:
        proportions = DEFAULT_PROPORTIONS
    if abs(sum(proportions.values()) - 1.0) > 1e-9:
        raise ValueError("class proportions must sum to 1")
    counts = _class_counts(n, proportions)

    rng = random.Random(seed)
    labels: list[RelationLabel] = []
    for label, count in counts.items():
        labels.extend([label] * count)
    rng.shuffle(labels)

    pairs = []
    for i, label in enumerate(labels):
        origin_words = rng.sample(FILLER_TOKENS, rng.randint(4, 7))
        target_words = rng.sample(FILLER_TOKENS, rng.randint(4, 7))
        if label is RelationLabel.DUPLICATION:
            marker = rng.choice(DUPLICATION_MARKERS)
            origin_words.insert(rng.randrange(len(origin_words) + 1), marker)
            target_words.insert(rng.randrange(len(target_words) + 1), marker)
        elif label is RelationLabel.REPAYMENT:
            marker = rng.choice(REPAYMENT_MARKERS)
            target_words.insert(rng.randrange(len(target_words) + 1), marker)

        origin_kind = rng.choice(_ALL_KINDS)
        target_kind = rng.choice(_ALL_KINDS)
        created = 1_600_000_000 + i * 60
        origin = make_artifact(origin_kind, " ".join(origin_words), created, uid=2 * i)
        target = make_artifact(target_kind, " ".join(target_words), created + 30, uid=2 * i + 1)
        pairs.append(
            SatdPair(
                pair_id=pair_id_for(origin.id, target.id),
                origin=origin,
                target=target,
                via_link=_link_between(origin, target),
                similarity=cosine_similarity(
                    tokenize(origin.text, tokenizer), tokenize(target.text, tokenizer)
                ),
                label=label,
            )
        )
    return pairs


def labeled_pair(
    uid: int,
    origin_text: str,
    target_text: str,
    label: RelationLabel,
    origin_kind: SourceKind = SourceKind.ISSUE_COMMENT,
    target_kind: SourceKind = SourceKind.COMMENT_ADDED,
    project: str = "import",
) -> SatdPair:
    """Wrap two raw texts as a schema-valid labeled pair.

    Used by the external-dataset import path, where only the texts and the
    label carry information; ids and containers are synthesized.
    """
    created = 1_400_000_000 + uid * 60
    origin = make_artifact(origin_kind, origin_text, created, uid=2 * uid, project=project)
    target = make_artifact(target_kind, target_text, created + 30, uid=2 * uid + 1, project=project)
    return SatdPair(
        pair_id=pair_id_for(origin.id, target.id),
        origin=origin,
        target=target,
        via_link=_link_between(origin, target),
        similarity=cosine_similarity(tokenize(origin.text), tokenize(target.text)),
        label=label,
    )


def random_labeled_pairs(
    n: int,
    seed: int = 0,
    labels: Sequence[RelationLabel] = tuple(RelationLabel),
) -> list[SatdPair]:
    """Uniformly random source kinds and labels; handy as a census fixture."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        origin_kind = rng.choice(_ALL_KINDS)
        target_kind = rng.choice(_ALL_KINDS)
        created = 1_500_000_000 + i * 60
        origin = make_artifact(
            origin_kind, " ".join(rng.sample(FILLER_TOKENS, 5)), created, uid=2 * i,
            project="fixture",
        )
        target = make_artifact(
            target_kind, " ".join(rng.sample(FILLER_TOKENS, 5)), created + 30, uid=2 * i + 1,
            project="fixture",
        )
        out.append(
            SatdPair(
                pair_id=pair_id_for(origin.id, target.id),
                origin=origin,
                target=target,
                via_link=_link_between(origin, target),
                similarity=cosine_similarity(tokenize(origin.text), tokenize(target.text)),
                label=rng.choice(tuple(labels)),
            )
        )
    return out
