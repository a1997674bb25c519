"""Shared domain types and the JSON-Lines persistence layer.

Every record type serializes to one JSON object per line carrying a schema
version field ``v`` and a ``type`` discriminator. Records are immutable value
objects; corpora are regenerated rather than updated in place.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

SCHEMA_VERSION = 1

_COMMIT_HASH_RE = re.compile(r"^[0-9a-f]{40}$")


class SchemaVersionError(ValueError):
    """Raised when a JSONL line carries an unsupported schema version."""


class RecordError(ValueError):
    """Raised when a record violates a type invariant."""


class SourceKind(str, Enum):
    """The nine places a text-bearing artifact can come from."""

    COMMENT_ADDED = "comment_added"
    COMMENT_DELETED = "comment_deleted"
    COMMIT_MESSAGE = "commit_message"
    ISSUE_SUMMARY = "issue_summary"
    ISSUE_DESCRIPTION = "issue_description"
    ISSUE_COMMENT = "issue_comment"
    PULL_SUMMARY = "pull_summary"
    PULL_DESCRIPTION = "pull_description"
    PULL_COMMENT = "pull_comment"


# Tie-break priority when two artifacts share a timestamp: the pair origin is
# the artifact whose kind comes first in this ordering, then the lower id.
SOURCE_KIND_PRIORITY: dict[SourceKind, int] = {
    SourceKind.ISSUE_SUMMARY: 0,
    SourceKind.ISSUE_DESCRIPTION: 1,
    SourceKind.ISSUE_COMMENT: 2,
    SourceKind.PULL_SUMMARY: 3,
    SourceKind.PULL_DESCRIPTION: 4,
    SourceKind.PULL_COMMENT: 5,
    SourceKind.COMMENT_ADDED: 6,
    SourceKind.COMMENT_DELETED: 7,
    SourceKind.COMMIT_MESSAGE: 8,
}

# Display labels used by census tables and the annotation UI.
SOURCE_KIND_LABELS: dict[SourceKind, str] = {
    SourceKind.COMMENT_ADDED: "comment[added]",
    SourceKind.COMMENT_DELETED: "comment[deleted]",
    SourceKind.COMMIT_MESSAGE: "commit",
    SourceKind.ISSUE_SUMMARY: "issue:summary",
    SourceKind.ISSUE_DESCRIPTION: "issue:description",
    SourceKind.ISSUE_COMMENT: "issue:comment",
    SourceKind.PULL_SUMMARY: "pull:summary",
    SourceKind.PULL_DESCRIPTION: "pull:description",
    SourceKind.PULL_COMMENT: "pull:comment",
}


class RelationLabel(str, Enum):
    """Relation between the two sides of a SATD pair."""

    NONE = "none"
    DUPLICATION = "duplication"
    REPAYMENT = "repayment"


# Fixed class order used for encoding, tie-breaking, and serialization.
CLASS_ORDER: tuple[RelationLabel, ...] = (
    RelationLabel.NONE,
    RelationLabel.DUPLICATION,
    RelationLabel.REPAYMENT,
)
CLASS_INDEX: dict[RelationLabel, int] = {c: i for i, c in enumerate(CLASS_ORDER)}


class ContainerKind(str, Enum):
    ISSUE = "issue"
    PULL = "pull"
    COMMIT = "commit"
    CODE_LOCATION = "code_location"


class ReferenceKind(str, Enum):
    """How a link between two containers was evidenced."""

    ISSUE_ID = "issue_id"
    PULL_ID = "pull_id"
    COMMIT_HASH = "commit_hash"
    CONTAINING_COMMIT = "containing_commit"


@dataclass(frozen=True, slots=True)
class Container:
    """An addressable unit that can hold artifacts and be linked to.

    ``native_id`` is the issue key, pull number, full commit hash, or
    ``path@commit`` for code locations.
    """

    kind: ContainerKind
    native_id: str
    project: str

    def validate(self) -> None:
        if not self.native_id:
            raise RecordError("container native_id must be non-empty")
        if self.kind is ContainerKind.COMMIT and not _COMMIT_HASH_RE.match(self.native_id):
            raise RecordError(
                f"commit native_id must be 40 lowercase hex chars, got {self.native_id!r}"
            )

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.project, self.kind.value, self.native_id)

    def to_json_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "native_id": self.native_id, "project": self.project}

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Container":
        return cls(
            kind=ContainerKind(data["kind"]),
            native_id=data["native_id"],
            project=data["project"],
        )


@dataclass(frozen=True, slots=True)
class Artifact:
    """One text-bearing item mined from a single source, with provenance.

    ``created_at`` is UTC seconds. Deleted code comments additionally carry
    ``added_at``, the time the comment text was first introduced, so that
    direction reasoning can see both ends of the comment's lifetime.
    ``evidence`` is a byte-offset span within the container's raw text.
    """

    id: str
    project: str
    source_kind: SourceKind
    text: str
    author: str
    is_bot: bool
    created_at: int
    container: Container
    evidence: tuple[int, int] | None = None
    added_at: int | None = None

    def validate(self) -> None:
        if not self.id:
            raise RecordError("artifact id must be non-empty")
        if not self.text.split():
            raise RecordError(f"artifact {self.id}: text empty after whitespace normalization")
        self.container.validate()
        if self.source_kind in (SourceKind.COMMENT_ADDED, SourceKind.COMMENT_DELETED):
            if self.container.kind is not ContainerKind.CODE_LOCATION:
                raise RecordError(
                    f"artifact {self.id}: comment artifacts need a code_location container"
                )
            if "@" not in self.container.native_id:
                raise RecordError(
                    f"artifact {self.id}: code_location native_id must carry path@commit"
                )

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "project": self.project,
            "source_kind": self.source_kind.value,
            "text": self.text,
            "author": self.author,
            "is_bot": self.is_bot,
            "created_at": self.created_at,
            "container": self.container.to_json_dict(),
            "evidence": list(self.evidence) if self.evidence is not None else None,
        }
        if self.added_at is not None:
            out["added_at"] = self.added_at
        return out

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Artifact":
        evidence = data.get("evidence")
        return cls(
            id=data["id"],
            project=data["project"],
            source_kind=SourceKind(data["source_kind"]),
            text=data["text"],
            author=data["author"],
            is_bot=bool(data["is_bot"]),
            created_at=int(data["created_at"]),
            container=Container.from_json_dict(data["container"]),
            evidence=tuple(evidence) if evidence is not None else None,
            added_at=data.get("added_at"),
        )


@dataclass(frozen=True, slots=True)
class Link:
    """A typed, evidenced reference edge between two containers."""

    src: Container
    dst: Container
    reference_kind: ReferenceKind
    evidence_text: str
    evidence_artifact_id: str

    def validate(self) -> None:
        self.src.validate()
        self.dst.validate()
        if self.src == self.dst:
            raise RecordError("link endpoints must differ")
        if self.reference_kind is ReferenceKind.COMMIT_HASH and self.dst.kind is not ContainerKind.COMMIT:
            raise RecordError("commit_hash link must point at a commit container")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "from": self.src.to_json_dict(),
            "to": self.dst.to_json_dict(),
            "reference_kind": self.reference_kind.value,
            "evidence_text": self.evidence_text,
            "evidence_artifact_id": self.evidence_artifact_id,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Link":
        return cls(
            src=Container.from_json_dict(data["from"]),
            dst=Container.from_json_dict(data["to"]),
            reference_kind=ReferenceKind(data["reference_kind"]),
            evidence_text=data["evidence_text"],
            evidence_artifact_id=data["evidence_artifact_id"],
        )


def pair_direction(a: Artifact, b: Artifact) -> tuple[Artifact, Artifact]:
    """Order two artifacts into (origin, target).

    Origin is the earlier ``created_at``; ties break by source-kind priority,
    then by id, so direction is total and deterministic.
    """
    ka = (a.created_at, SOURCE_KIND_PRIORITY[a.source_kind], a.id)
    kb = (b.created_at, SOURCE_KIND_PRIORITY[b.source_kind], b.id)
    return (a, b) if ka <= kb else (b, a)


@dataclass(frozen=True, slots=True)
class SatdPair:
    """Two SATD artifacts joined by a link, with similarity and optional label."""

    pair_id: str
    origin: Artifact
    target: Artifact
    via_link: Link
    similarity: float
    label: RelationLabel | None = None
    annotator: str | None = None

    def validate(self) -> None:
        if not self.pair_id:
            raise RecordError("pair_id must be non-empty")
        self.origin.validate()
        self.target.validate()
        self.via_link.validate()
        if self.origin.created_at > self.target.created_at:
            raise RecordError(
                f"pair {self.pair_id}: origin must not be created after target"
            )
        if not 0.0 <= self.similarity <= 1.0:
            raise RecordError(f"pair {self.pair_id}: similarity {self.similarity} outside [0,1]")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "pair_id": self.pair_id,
            "origin": self.origin.to_json_dict(),
            "target": self.target.to_json_dict(),
            "via_link": self.via_link.to_json_dict(),
            "similarity": self.similarity,
            "label": self.label.value if self.label is not None else None,
            "annotator": self.annotator,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "SatdPair":
        label = data.get("label")
        return cls(
            pair_id=data["pair_id"],
            origin=Artifact.from_json_dict(data["origin"]),
            target=Artifact.from_json_dict(data["target"]),
            via_link=Link.from_json_dict(data["via_link"]),
            similarity=float(data["similarity"]),
            label=RelationLabel(label) if label is not None else None,
            annotator=data.get("annotator"),
        )


@dataclass(frozen=True, slots=True)
class SatdFlag:
    """Provenance of how an artifact was flagged as SATD."""

    artifact_id: str
    method: str  # "keyword" or "model"
    matched_patterns: tuple[str, ...] = ()
    score: float | None = None

    def validate(self) -> None:
        if not self.artifact_id:
            raise RecordError("satd flag needs an artifact_id")
        if self.method not in ("keyword", "model"):
            raise RecordError(f"unknown satd detection method {self.method!r}")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "artifact_id": self.artifact_id,
            "method": self.method,
            "matched_patterns": list(self.matched_patterns),
            "score": self.score,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "SatdFlag":
        return cls(
            artifact_id=data["artifact_id"],
            method=data["method"],
            matched_patterns=tuple(data.get("matched_patterns", ())),
            score=data.get("score"),
        )


# Annotation labels additionally allow "skip"; the store keeps every
# submission, so the effective label of a (pair, annotator) is the last line
# written for that key.
ANNOTATION_LABELS = ("none", "duplication", "repayment", "skip")


@dataclass(frozen=True, slots=True)
class AnnotationRecord:
    """One label submission from the annotation service's append-only store."""

    pair_id: str
    annotator: str
    label: str
    labeled_at: int
    session: str = ""

    def validate(self) -> None:
        if not self.pair_id or not self.annotator:
            raise RecordError("annotation needs pair_id and annotator")
        if self.label not in ANNOTATION_LABELS:
            raise RecordError(
                f"label {self.label!r} not in allowed set {list(ANNOTATION_LABELS)}"
            )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "pair_id": self.pair_id,
            "annotator": self.annotator,
            "label": self.label,
            "labeled_at": self.labeled_at,
            "session": self.session,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "AnnotationRecord":
        return cls(
            pair_id=data["pair_id"],
            annotator=data["annotator"],
            label=data["label"],
            labeled_at=int(data["labeled_at"]),
            session=data.get("session", ""),
        )


Record = Artifact | Link | SatdPair | SatdFlag | AnnotationRecord

_TYPE_TAGS: dict[type, str] = {
    Artifact: "artifact",
    Link: "link",
    SatdPair: "pair",
    SatdFlag: "satd",
    AnnotationRecord: "annotation",
}
_TAG_TYPES: dict[str, type] = {tag: cls for cls, tag in _TYPE_TAGS.items()}

# ids must be unique within one written corpus file; this picks the field
# that identifies each record kind.
_ID_FIELDS: dict[str, str] = {"artifact": "id", "pair": "pair_id", "satd": "artifact_id"}


def record_to_line(record: Record) -> str:
    tag = _TYPE_TAGS[type(record)]
    payload: dict[str, Any] = {"v": SCHEMA_VERSION, "type": tag}
    payload.update(record.to_json_dict())
    return json.dumps(payload, ensure_ascii=False)


def record_from_dict(data: dict[str, Any]) -> Record:
    version = data.get("v")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"unsupported schema version {version!r}, expected {SCHEMA_VERSION}")
    tag = data.get("type")
    cls = _TAG_TYPES.get(tag)
    if cls is None:
        raise RecordError(f"unknown record type {tag!r}")
    record = cls.from_json_dict(data)
    record.validate()
    return record


def write_jsonl(records: Iterable[Record], path: str | Path) -> int:
    """Write records as JSON-Lines, validating invariants; returns lines written.

    A record violating its invariants aborts the write with the index of the
    offending record. Within one call, record ids must be unique.
    """
    path = Path(path)
    lines: list[str] = []
    seen_ids: set[tuple[str, str]] = set()
    for index, record in enumerate(records):
        try:
            record.validate()
        except RecordError as exc:
            raise RecordError(f"record {index}: {exc}") from exc
        tag = _TYPE_TAGS[type(record)]
        id_field = _ID_FIELDS.get(tag)
        if id_field is not None:
            key = (tag, getattr(record, id_field))
            if key in seen_ids:
                raise RecordError(f"record {index}: duplicate {id_field} {key[1]!r}")
            seen_ids.add(key)
        lines.append(record_to_line(record))
    with path.open("w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
    return len(lines)


def read_jsonl(path: str | Path, expected_type: str | None = None) -> list[Record]:
    """Read and revalidate records in file order.

    Malformed lines and schema-version mismatches raise with the 1-based line
    number. ``expected_type`` restricts the accepted ``type`` discriminator.
    """
    if expected_type is not None and expected_type not in _TAG_TYPES:
        raise ValueError(f"unknown expected_type {expected_type!r}")
    path = Path(path)
    records: list[Record] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise RecordError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            try:
                record = record_from_dict(data)
            except SchemaVersionError as exc:
                raise SchemaVersionError(f"{path}:{lineno}: {exc}") from exc
            except (RecordError, KeyError, ValueError) as exc:
                raise RecordError(f"{path}:{lineno}: {exc}") from exc
            if expected_type is not None and data["type"] != expected_type:
                raise RecordError(
                    f"{path}:{lineno}: expected {expected_type!r} record, got {data['type']!r}"
                )
            records.append(record)
    return records
