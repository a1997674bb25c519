"""Corpus-wide relation census by directed source-kind pair.

Rows group labeled pairs by (origin kind, target kind); pairs labeled none
are excluded. Each relation type's percentages are taken against that
relation's grand total, so each percentage column sums to 100. Nine recurring
origin/target/relation combinations carry a major-case number.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .model import (
    SOURCE_KIND_LABELS,
    RelationLabel,
    SatdPair,
    SourceKind,
)
from .nn.net import PairClassifierParams
from .nn.train import predict_pairs
from .nn.vocab import Vocabulary
from .pairs import DEFAULT_TOKENIZER, TokenizerConfig

# Origin kinds in the order the relation table groups them; kinds the table
# does not show (descriptions, commit-message origins) come after.
CENSUS_ORIGIN_ORDER = (
    SourceKind.ISSUE_SUMMARY,
    SourceKind.PULL_SUMMARY,
    SourceKind.ISSUE_COMMENT,
    SourceKind.PULL_COMMENT,
    SourceKind.COMMENT_ADDED,
    SourceKind.COMMENT_DELETED,
    SourceKind.ISSUE_DESCRIPTION,
    SourceKind.PULL_DESCRIPTION,
    SourceKind.COMMIT_MESSAGE,
)

_SUMMARY_KINDS = frozenset({SourceKind.ISSUE_SUMMARY, SourceKind.PULL_SUMMARY})
_DISCUSSION_KINDS = frozenset({SourceKind.ISSUE_COMMENT, SourceKind.PULL_COMMENT})


def major_case_label(
    origin_kind: SourceKind, target_kind: SourceKind, relation: RelationLabel
) -> int | None:
    """Case number 1-9 for the recurring combinations, else None.

    Cases 3, 4, and 7 apply to both relations; 1, 2, and 8 to repayment only;
    5, 6, and 9 to duplication only.
    """
    dup = relation is RelationLabel.DUPLICATION
    rep = relation is RelationLabel.REPAYMENT
    if not (dup or rep):
        return None
    if origin_kind in _SUMMARY_KINDS and target_kind is SourceKind.COMMIT_MESSAGE:
        return 1 if rep else None
    if origin_kind in _DISCUSSION_KINDS and target_kind is SourceKind.COMMIT_MESSAGE:
        return 2 if rep else None
    if origin_kind in _SUMMARY_KINDS and target_kind is SourceKind.COMMENT_ADDED:
        return 3
    if origin_kind in _DISCUSSION_KINDS and target_kind is SourceKind.COMMENT_ADDED:
        return 4
    if origin_kind is SourceKind.COMMENT_ADDED and target_kind in _SUMMARY_KINDS:
        return 5 if dup else None
    if origin_kind is SourceKind.COMMENT_ADDED and target_kind in _DISCUSSION_KINDS:
        return 6 if dup else None
    if origin_kind is SourceKind.COMMENT_ADDED and target_kind is SourceKind.COMMIT_MESSAGE:
        return 7
    if origin_kind is SourceKind.COMMENT_DELETED and target_kind is SourceKind.COMMIT_MESSAGE:
        return 8 if rep else None
    if origin_kind is SourceKind.ISSUE_SUMMARY and target_kind is SourceKind.PULL_SUMMARY:
        return 9 if dup else None
    return None


def _row_case(origin_kind: SourceKind, target_kind: SourceKind) -> int | None:
    for relation in (RelationLabel.DUPLICATION, RelationLabel.REPAYMENT):
        case = major_case_label(origin_kind, target_kind, relation)
        if case is not None:
            return case
    return None


@dataclass(frozen=True, slots=True)
class CensusRow:
    origin_kind: SourceKind
    target_kind: SourceKind
    duplication_count: int
    duplication_pct: float
    repayment_count: int
    repayment_pct: float
    major_case: int | None

    @property
    def total(self) -> int:
        return self.duplication_count + self.repayment_count

    def to_json_dict(self) -> dict:
        return {
            "origin_kind": self.origin_kind.value,
            "target_kind": self.target_kind.value,
            "origin_label": SOURCE_KIND_LABELS[self.origin_kind],
            "target_label": SOURCE_KIND_LABELS[self.target_kind],
            "duplication_count": self.duplication_count,
            "duplication_pct": self.duplication_pct,
            "repayment_count": self.repayment_count,
            "repayment_pct": self.repayment_pct,
            "major_case": self.major_case,
        }


def relation_census(pairs: Sequence[SatdPair]) -> list[CensusRow]:
    """Aggregate labeled pairs into the directed source-kind relation table.

    Rows with zero counts for both relations are omitted. Percentages are
    stored unrounded so each relation column sums to exactly 100 when any
    pairs of that relation exist.
    """
    counts: dict[tuple[SourceKind, SourceKind], dict[RelationLabel, int]] = {}
    totals = {RelationLabel.DUPLICATION: 0, RelationLabel.REPAYMENT: 0}
    for pair in pairs:
        if pair.label not in totals:
            continue
        key = (pair.origin.source_kind, pair.target.source_kind)
        bucket = counts.setdefault(
            key, {RelationLabel.DUPLICATION: 0, RelationLabel.REPAYMENT: 0}
        )
        bucket[pair.label] += 1
        totals[pair.label] += 1

    origin_rank = {kind: i for i, kind in enumerate(CENSUS_ORIGIN_ORDER)}
    ordered = sorted(
        counts,
        key=lambda key: (origin_rank[key[0]], SOURCE_KIND_LABELS[key[1]]),
    )
    rows = []
    for origin_kind, target_kind in ordered:
        bucket = counts[(origin_kind, target_kind)]
        dup = bucket[RelationLabel.DUPLICATION]
        rep = bucket[RelationLabel.REPAYMENT]
        rows.append(
            CensusRow(
                origin_kind=origin_kind,
                target_kind=target_kind,
                duplication_count=dup,
                duplication_pct=100.0 * dup / totals[RelationLabel.DUPLICATION]
                if totals[RelationLabel.DUPLICATION]
                else 0.0,
                repayment_count=rep,
                repayment_pct=100.0 * rep / totals[RelationLabel.REPAYMENT]
                if totals[RelationLabel.REPAYMENT]
                else 0.0,
                major_case=_row_case(origin_kind, target_kind),
            )
        )
    return rows


def highlight_rows(table: Sequence[CensusRow], threshold: int = 1000) -> list[bool]:
    """Flag rows whose combined relation count exceeds the threshold."""
    return [row.total > threshold for row in table]


def classify_corpus(
    pairs: Sequence[SatdPair],
    params: PairClassifierParams,
    vocab: Vocabulary,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> list[SatdPair]:
    """Predict a relation label for every pair; cardinality is preserved."""
    if not pairs:
        return []
    predictions = predict_pairs(pairs, params, vocab, tokenizer)
    return [
        replace(pair, label=label) for pair, (label, _) in zip(pairs, predictions)
    ]


def census_markdown(table: Sequence[CensusRow], threshold: int = 1000) -> str:
    """Markdown rendition of the census with bold high-volume rows."""
    flags = highlight_rows(table, threshold)
    lines = [
        "| Major Case | Original → Duplicated / Repaid | Dup. # | Dup. % | Rep. # | Rep. % |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for row, bold in zip(table, flags):
        arrow = f"{SOURCE_KIND_LABELS[row.origin_kind]} → {SOURCE_KIND_LABELS[row.target_kind]}"
        if bold:
            arrow = f"**{arrow}**"
        case = str(row.major_case) if row.major_case is not None else ""
        lines.append(
            f"| {case} | {arrow} | {row.duplication_count:,} | {row.duplication_pct:.1f}"
            f" | {row.repayment_count:,} | {row.repayment_pct:.1f} |"
        )
    return "\n".join(lines) + "\n"
